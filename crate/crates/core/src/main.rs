fn main() {
    std::process::exit(miop::cli::run());
}
