fn main() {
    std::process::exit(snspm_core::cli::main_with_args(std::env::args_os()));
}
