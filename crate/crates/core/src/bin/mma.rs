fn main() {
    std::process::exit(levy_mma::cli::run(std::env::args_os()));
}
