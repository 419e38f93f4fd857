use clap::Parser;

fn main() {
    let cli = covlab::cli::Cli::parse();
    std::process::exit(covlab::cli::run(cli));
}
