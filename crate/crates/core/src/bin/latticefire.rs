fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(latticefire::cli::cli_main(&argv));
}
