fn main() {
    std::process::exit(pluto::cli::main_with_args(std::env::args_os()));
}
