fn main() {
    env_logger::Builder::new()
        .filter_level(log::LevelFilter::Warn)
        .format_target(false)
        .init();
    std::process::exit(orl::cli::main_with_args(std::env::args_os()));
}
