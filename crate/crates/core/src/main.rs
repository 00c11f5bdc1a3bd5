fn main() {
    std::process::exit(helmpseudo::cli::main_entry());
}
