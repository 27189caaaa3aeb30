fn main() {
    std::process::exit(lpeuler::cli::parse_and_dispatch(std::env::args()));
}
