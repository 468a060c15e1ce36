fn main() {
    std::process::exit(infswap::cli::main_with_args(std::env::args_os()));
}
