fn main() {
    std::process::exit(netbell::cli::dispatch(std::env::args_os()));
}
