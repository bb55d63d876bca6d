fn main() {
    std::process::exit(lieball::cli::main_with_args(std::env::args_os()));
}
