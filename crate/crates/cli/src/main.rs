use clap::Parser;
use cuspflow::{error::EXIT_OK, execute, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("cuspflow: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
