fn main() {
    std::process::exit(tlvnet::run(std::env::args_os()));
}
