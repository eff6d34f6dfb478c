fn main() {
    std::process::exit(proxsmooth_cli::main_with_args(std::env::args_os().collect()));
}
