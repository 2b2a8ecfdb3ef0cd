fn main() {
    std::process::exit(rising_spectrum_cli::run(std::env::args_os()));
}
