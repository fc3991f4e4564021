fn main() {
    std::process::exit(optk_cli::cli_main(std::env::args()));
}
