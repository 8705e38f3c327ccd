fn main() {
    std::process::exit(overlap_cli::run(std::env::args_os()));
}
