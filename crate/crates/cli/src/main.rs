fn main() {
    std::process::exit(graphvariate_cli::run(std::env::args_os()));
}
