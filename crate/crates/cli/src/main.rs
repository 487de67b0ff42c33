fn main() {
    std::process::exit(nondegen_cli::run(std::env::args_os()));
}
