fn main() {
    std::process::exit(mpna::cli::main_with(std::env::args_os()));
}
