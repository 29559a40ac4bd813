fn main() {
    std::process::exit(modfrft::cli::main_with_args(std::env::args_os()));
}
