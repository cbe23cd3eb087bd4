fn main() {
    std::process::exit(gchlab_cli::main_with_args(std::env::args_os()));
}
