fn main() {
    std::process::exit(twisted_heights::cli::cmd_dispatch(std::env::args_os()));
}
