fn main() {
    std::process::exit(pillar_cli::run_from_args(std::env::args_os()));
}
