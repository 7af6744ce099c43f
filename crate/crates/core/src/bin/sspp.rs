use clap::Parser;
use sspp::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        let msg = e.to_string().replace('\n', " ");
        eprintln!("error[{}]: {}", e.code(), msg);
        std::process::exit(e.exit_code());
    }
}
