fn main() {
    std::process::exit(jetcheck::cli::run(std::env::args()));
}
