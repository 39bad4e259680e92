use clap::Parser;
use hyperfill::cli::{run, Cli};
use hyperfill::report::error_json;

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            println!("{}", error_json(e.kind(), &format!("{e}")));
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
