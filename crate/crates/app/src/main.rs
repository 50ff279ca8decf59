fn main() {
    std::process::exit(revrec::cli::run(std::env::args_os()));
}
