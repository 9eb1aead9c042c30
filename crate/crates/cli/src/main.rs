fn main() {
    std::process::exit(eslab::run(std::env::args_os().skip(1)));
}
