fn main() {
    std::process::exit(dact_core::cli::run(std::env::args_os()));
}
