fn main() {
    std::process::exit(quantum_grueneisen::cli::run(std::env::args_os()));
}
