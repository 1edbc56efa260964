fn main() {
    pleig::cli::init_logging();
    std::process::exit(pleig::cli::main_with_args(std::env::args_os()));
}
