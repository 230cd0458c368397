fn main() {
    std::process::exit(asep_spectra::cli::run(std::env::args_os()));
}
