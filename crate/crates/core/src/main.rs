fn main() {
    std::process::exit(rcstab::harness::cli::run(std::env::args_os()));
}
