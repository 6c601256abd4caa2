fn main() {
    std::process::exit(bergman_lab::cli::run(std::env::args_os()));
}
