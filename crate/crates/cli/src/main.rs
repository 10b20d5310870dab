fn main() {
    std::process::exit(diqrng_cli::run(std::env::args_os()));
}
