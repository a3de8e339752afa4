fn main() {
    std::process::exit(stagedcausal::cli::run(std::env::args_os()));
}
