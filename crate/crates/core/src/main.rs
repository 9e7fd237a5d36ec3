fn main() {
    std::process::exit(icecav::cli::main_from_env());
}
