fn main() {
    std::process::exit(coqe::cli::run(std::env::args_os()));
}
