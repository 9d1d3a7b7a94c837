fn main() {
    std::process::exit(asmprop::cli::main())
}
