fn main() {
    std::process::exit(blockfree::cli::run(std::env::args_os()));
}
