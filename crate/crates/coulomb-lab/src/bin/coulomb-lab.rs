fn main() {
    std::process::exit(coulomb_lab::cli::main_with(std::env::args_os()));
}
