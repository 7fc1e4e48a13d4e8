fn main() {
    std::process::exit(gradsamp_cli::run(std::env::args_os()));
}
