fn main() {
    std::process::exit(csp_glass::cli::main_with_args(std::env::args_os()));
}
