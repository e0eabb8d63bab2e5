fn main() {
    std::process::exit(drift_hodge::cli::run(std::env::args_os()));
}
