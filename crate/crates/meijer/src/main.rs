fn main() {
    std::process::exit(meijer::cli::run(std::env::args_os()));
}
