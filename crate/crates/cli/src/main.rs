use clap::Parser;
use gibbsdiv_cli::config::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = gibbsdiv_cli::run(cli) {
        eprintln!("{}", e.to_json());
        std::process::exit(e.exit_code());
    }
}
