fn main() {
    std::process::exit(expcli::run_cli(std::env::args_os()));
}
