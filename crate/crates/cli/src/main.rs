fn main() {
    std::process::exit(wpbs_cli::run(std::env::args_os()));
}
