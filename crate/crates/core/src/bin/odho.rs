fn main() {
    std::process::exit(odho::cli::run());
}
