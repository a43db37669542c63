fn main() {
    std::process::exit(spdot::cli::run(std::env::args_os()));
}
