fn main() {
    std::process::exit(coda_dfm::cli::run(std::env::args_os()));
}
