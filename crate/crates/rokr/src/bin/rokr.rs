fn main() {
    std::process::exit(rokr::harness::cli(std::env::args_os()));
}
