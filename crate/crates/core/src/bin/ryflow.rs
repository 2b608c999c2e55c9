fn main() {
    std::process::exit(ryflow_core::cli::run_cli(std::env::args_os()));
}
