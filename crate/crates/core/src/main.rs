use clap::Parser;

fn main() {
    let cli = halfspace::cli::Cli::parse();
    std::process::exit(halfspace::cli::run(cli));
}
