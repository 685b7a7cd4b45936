fn main() {
    std::process::exit(preq::cli::main_with_args(std::env::args_os()));
}
