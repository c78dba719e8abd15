fn main() {
    std::process::exit(temporal_rac_cli::run(std::env::args_os()));
}
