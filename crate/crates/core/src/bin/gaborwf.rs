fn main() {
    std::process::exit(gaborwf::cli::main_with_args(std::env::args_os()));
}
