fn main() {
    std::process::exit(compseq_cli::run(std::env::args_os()));
}
