fn main() {
    std::process::exit(ftsmm::cli::main_with_args(std::env::args_os()));
}
