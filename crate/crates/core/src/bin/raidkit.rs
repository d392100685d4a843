fn main() {
    std::process::exit(raidkit::cli::main_with_args(std::env::args_os()));
}
