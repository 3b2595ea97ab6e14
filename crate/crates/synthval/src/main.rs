fn main() {
    std::process::exit(synthval::cli::run(std::env::args_os()));
}
