fn main() {
    std::process::exit(blockcur_cli::run(std::env::args_os()));
}
