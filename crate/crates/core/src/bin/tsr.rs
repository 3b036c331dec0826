fn main() {
    std::process::exit(temporal_steering::cli::main());
}
