fn main() {
    std::process::exit(pslab::cli::main_with(std::env::args_os()));
}
