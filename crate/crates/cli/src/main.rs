fn main() {
    std::process::exit(atomguard_cli::run(std::env::args_os()));
}
