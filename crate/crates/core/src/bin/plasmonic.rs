fn main() {
    std::process::exit(plasmonic::cli::main_with_args(std::env::args_os()));
}
