fn main() {
    std::process::exit(permtwist::cli::run_from_env());
}
