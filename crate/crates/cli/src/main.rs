fn main() {
    std::process::exit(lpcs_cli::run(std::env::args_os()));
}
