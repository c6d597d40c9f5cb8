fn main() {
    std::process::exit(lipkit_cli::main_with(std::env::args_os()));
}
