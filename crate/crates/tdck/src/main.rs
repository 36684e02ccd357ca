fn main() {
    std::process::exit(tdck::cli::run(std::env::args_os()));
}
