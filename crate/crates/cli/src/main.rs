fn main() {
    std::process::exit(hobi_pb_cli::run(std::env::args_os()));
}
