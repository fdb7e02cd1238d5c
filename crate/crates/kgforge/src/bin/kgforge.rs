use env_logger::Env;

fn main() {
    env_logger::Builder::from_env(Env::default().default_filter_or("warn")).init();
    kgforge::bundled::register_bundled();
    std::process::exit(kgforge::cli::run());
}
