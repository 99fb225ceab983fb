fn main() {
    std::process::exit(latsum::cli::run(std::env::args_os()));
}
