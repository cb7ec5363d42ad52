fn main() {
    std::process::exit(swarmsim::cli_main(std::env::args_os()));
}
