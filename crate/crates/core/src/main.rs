fn main() {
    std::process::exit(glaeser::cli::run(std::env::args_os()));
}
