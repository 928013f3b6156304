fn main() {
    std::process::exit(testroll::cli::run(std::env::args_os()));
}
