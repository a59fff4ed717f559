fn main() {
    std::process::exit(mvtlab::cli::run(std::env::args_os()));
}
