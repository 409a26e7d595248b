use clap::Parser;

use distexp_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(&cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
