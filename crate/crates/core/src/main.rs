fn main() {
    std::process::exit(weldnet::cli::run(std::env::args_os()));
}
