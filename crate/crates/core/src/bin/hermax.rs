fn main() {
    std::process::exit(hermax::cli::main_with_args(std::env::args_os()));
}
