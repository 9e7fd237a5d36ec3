use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Policy selector, written `uncontrolled`, `constfrac:<f>`, `mdp` or
/// `qmdp:<sx>,<sy>,<sz>,<Nb>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PolicyKind {
    Uncontrolled,
    ConstFrac(f64),
    Mdp,
    Qmdp { sigma: [f64; 3], samples: usize },
}

impl PolicyKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PolicyKind::ConstFrac(f) if !(f > 0.0 && f < 1.0) => {
                Err(Error::config(format!("depth fraction {f} must lie in (0, 1)")))
            }
            PolicyKind::Qmdp { sigma, samples } => {
                if sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
                    return Err(Error::config(format!("belief sigmas {sigma:?} must be >= 0")));
                }
                if samples == 0 {
                    return Err(Error::config("belief sample budget must be at least 1"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn needs_solution(&self) -> bool {
        matches!(self, PolicyKind::Mdp | PolicyKind::Qmdp { .. })
    }

    /// Position uncertainty the policy acts under.
    pub fn belief_sigma(&self) -> [f64; 3] {
        match *self {
            PolicyKind::Qmdp { sigma, .. } => sigma,
            _ => [0.0; 3],
        }
    }

    pub fn belief_samples(&self) -> usize {
        match *self {
            PolicyKind::Qmdp { samples, .. } => samples,
            _ => 1,
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::Uncontrolled => f.write_str("uncontrolled"),
            PolicyKind::ConstFrac(v) => write!(f, "constfrac:{v}"),
            PolicyKind::Mdp => f.write_str("mdp"),
            PolicyKind::Qmdp { sigma, samples } => {
                write!(f, "qmdp:{},{},{},{}", sigma[0], sigma[1], sigma[2], samples)
            }
        }
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config(format!("unknown policy {s:?}"));
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let kind = match (name, args) {
            ("uncontrolled", None) => PolicyKind::Uncontrolled,
            ("mdp", None) => PolicyKind::Mdp,
            ("constfrac", Some(a)) => PolicyKind::ConstFrac(a.trim().parse().map_err(|_| bad())?),
            ("qmdp", Some(a)) => {
                let parts: Vec<&str> = a.split(',').map(str::trim).collect();
                if parts.len() != 4 {
                    return Err(bad());
                }
                let mut sigma = [0.0; 3];
                for (d, p) in sigma.iter_mut().zip(&parts) {
                    *d = p.parse().map_err(|_| bad())?;
                }
                PolicyKind::Qmdp {
                    sigma,
                    samples: parts[3].parse().map_err(|_| bad())?,
                }
            }
            _ => return Err(bad()),
        };
        kind.validate()?;
        Ok(kind)
    }
}
