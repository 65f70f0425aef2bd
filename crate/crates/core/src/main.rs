fn main() {
    std::process::exit(intermo::cli::run(std::env::args_os()));
}
