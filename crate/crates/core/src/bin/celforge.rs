fn main() {
    std::process::exit(celforge::cli::run(std::env::args_os()));
}
