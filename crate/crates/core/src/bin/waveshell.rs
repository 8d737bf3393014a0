fn main() {
    std::process::exit(waveshell::cli::main_with_args(std::env::args_os()));
}
