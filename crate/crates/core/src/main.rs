fn main() {
    std::process::exit(rfsense::cli::main_with_args(std::env::args_os()));
}
