fn main() {
    std::process::exit(svl_cli::run_main());
}
