fn main() {
    std::process::exit(gradfree::cli::run_cli());
}
