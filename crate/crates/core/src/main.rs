fn main() {
    std::process::exit(inar2::cli::run(std::env::args_os()));
}
