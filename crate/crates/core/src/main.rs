fn main() {
    std::process::exit(argp::cli::run(std::env::args_os()));
}
