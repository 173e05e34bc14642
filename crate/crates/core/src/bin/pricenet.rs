fn main() {
    std::process::exit(pricenet::cli::main());
}
