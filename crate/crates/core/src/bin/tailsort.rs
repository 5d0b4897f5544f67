fn main() {
    std::process::exit(tailsort::cli::run(std::env::args_os()));
}
