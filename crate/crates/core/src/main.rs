fn main() {
    std::process::exit(res112::cli::run_from(std::env::args_os()));
}
