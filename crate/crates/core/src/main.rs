fn main() {
    std::process::exit(mjspec::cli::run(std::env::args_os()));
}
