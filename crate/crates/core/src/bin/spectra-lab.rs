fn main() {
    std::process::exit(singular_spectra::cli::main_with_args(std::env::args_os()));
}
