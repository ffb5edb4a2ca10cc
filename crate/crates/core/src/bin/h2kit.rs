fn main() {
    std::process::exit(h2kit::cli::run(std::env::args_os()));
}
