use clap::Parser;

fn main() {
    let cli = diamond::cli::Cli::parse();
    std::process::exit(diamond::cli::run(cli));
}
