fn main() {
    std::process::exit(strongties::cli::main_with_args(std::env::args_os()));
}
