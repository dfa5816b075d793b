fn main() {
    std::process::exit(commentlab::cli::run(std::env::args_os()));
}
