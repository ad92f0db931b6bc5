fn main() {
    std::process::exit(spectra_lab::runner::main_with_args(std::env::args_os()));
}
