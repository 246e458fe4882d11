fn main() {
    std::process::exit(krein_lab::cli::main_with_args(std::env::args_os()));
}
