fn main() {
    std::process::exit(qbasis::cli::run(std::env::args_os()));
}
