fn main() {
    std::process::exit(wsbdf::cli::cli_main(std::env::args_os()));
}
