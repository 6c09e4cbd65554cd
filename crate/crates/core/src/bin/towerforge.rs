fn main() {
    let code = towerforge::cli::cli_main(std::env::args());
    std::process::exit(code);
}
