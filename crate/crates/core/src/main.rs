fn main() {
    std::process::exit(loopsoup::experiments::cli::run(std::env::args_os()));
}
