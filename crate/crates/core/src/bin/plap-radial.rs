fn main() {
    std::process::exit(plap_radial::cli::main_with(std::env::args_os()));
}
