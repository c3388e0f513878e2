fn main() {
    std::process::exit(ginibre::cli::main_exit_code());
}
