fn main() {
    std::process::exit(kinetex::run_cli(std::env::args_os()));
}
