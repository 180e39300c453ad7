fn main() {
    std::process::exit(fraclab_cli::run(std::env::args_os()));
}
