fn main() {
    std::process::exit(qichan::cli::main_with_args(std::env::args_os()));
}
