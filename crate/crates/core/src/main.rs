fn main() {
    std::process::exit(qfa_equiv::cli::run(std::env::args_os()));
}
