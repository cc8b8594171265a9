fn main() {
    std::process::exit(handbrain::cli::run(std::env::args_os()));
}
