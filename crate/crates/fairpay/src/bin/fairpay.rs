fn main() {
    std::process::exit(fairpay::cli::main_with_args(std::env::args_os()));
}
