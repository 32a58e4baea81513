fn main() {
    std::process::exit(frobtrace_cli::main_with_args(std::env::args_os()));
}
