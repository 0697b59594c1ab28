fn main() {
    std::process::exit(mcci::cli::main_with_args(std::env::args_os()));
}
