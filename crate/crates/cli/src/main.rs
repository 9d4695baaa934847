fn main() {
    std::process::exit(cgforge_cli::run(std::env::args_os()));
}
