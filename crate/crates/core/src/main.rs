fn main() {
    std::process::exit(poisson_nav::harness::cli::run(std::env::args_os()));
}
