fn main() {
    std::process::exit(outcomes::cli::run(std::env::args_os()));
}
