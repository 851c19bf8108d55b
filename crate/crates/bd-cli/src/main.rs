fn main() {
    std::process::exit(bd_cli::run());
}
