use clap::Parser;
use muntzlab::cli::{configure_threads, exit_code, run, Cli};

fn main() {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run(&cli));
    match result {
        Ok(path) => eprintln!("wrote {}", path.display()),
        Err(e) => {
            eprintln!("muntzlab: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}
