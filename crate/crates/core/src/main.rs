fn main() {
    std::process::exit(rhombex::cli::run(std::env::args_os()));
}
