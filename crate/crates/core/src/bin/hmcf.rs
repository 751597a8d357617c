fn main() {
    std::process::exit(hmcf::cli::main_with_args(std::env::args_os()));
}
