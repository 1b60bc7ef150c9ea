fn main() {
    std::process::exit(mimo_augment::harness::cli_main(std::env::args_os()));
}
