fn main() {
    std::process::exit(dsm_cli::run(std::env::args_os()));
}
