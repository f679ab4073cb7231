fn main() {
    std::process::exit(tempdeg_cli::run(std::env::args_os()));
}
