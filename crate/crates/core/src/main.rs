fn main() {
    std::process::exit(pseudovario::cli::run(std::env::args_os()));
}
