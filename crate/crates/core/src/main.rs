fn main() {
    std::process::exit(sqboost::cli::run(std::env::args_os()));
}
