fn main() {
    std::process::exit(cournot_stability::cli::run());
}
