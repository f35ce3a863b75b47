fn main() {
    std::process::exit(ssfactor::cli::run(std::env::args_os()));
}
