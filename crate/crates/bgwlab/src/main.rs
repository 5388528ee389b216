fn main() {
    std::process::exit(bgwlab::cli::run(std::env::args_os()));
}
