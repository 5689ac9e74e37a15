fn main() {
    std::process::exit(canet_core::cli::run_command(std::env::args_os()));
}
