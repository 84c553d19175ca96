fn main() {
    std::process::exit(mvseg::cli::main());
}
