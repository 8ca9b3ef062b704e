fn main() {
    std::process::exit(wander_lab::cli::run_cli());
}
