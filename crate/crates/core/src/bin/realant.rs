fn main() {
    std::process::exit(realant::cli::run(std::env::args_os()));
}
