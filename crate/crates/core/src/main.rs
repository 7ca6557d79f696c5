fn main() {
    std::process::exit(fasperf::cli::run(std::env::args_os()));
}
