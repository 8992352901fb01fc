fn main() {
    std::process::exit(approxred::cli::run(std::env::args_os()));
}
