fn main() {
    std::process::exit(ffopt_cli::run(std::env::args_os()));
}
