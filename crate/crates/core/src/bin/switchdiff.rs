use clap::Parser;

fn main() {
    let cli = switchdiff::cli::Cli::parse();
    std::process::exit(switchdiff::cli::run(cli));
}
