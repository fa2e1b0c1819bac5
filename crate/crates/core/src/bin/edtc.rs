fn main() {
    std::process::exit(edtc::cli::run(std::env::args_os()));
}
