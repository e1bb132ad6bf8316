fn main() {
    std::process::exit(alpha_channel_cli::run(std::env::args_os()));
}
