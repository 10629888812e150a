fn main() {
    std::process::exit(nugs::cli::run(std::env::args_os()));
}
