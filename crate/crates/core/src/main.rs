fn main() {
    std::process::exit(qpolar::cli::run(std::env::args_os()));
}
