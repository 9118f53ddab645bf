fn main() {
    std::process::exit(covevo::cli::run(std::env::args_os()));
}
