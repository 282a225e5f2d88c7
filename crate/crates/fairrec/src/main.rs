use clap::Parser;
use fairrec::cli::Cli;

fn main() {
    // FAIRREC_THREADS caps the worker pool; unset means rayon's default.
    if let Ok(threads) = std::env::var("FAIRREC_THREADS") {
        if let Ok(threads) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        } else {
            eprintln!("config: FAIRREC_THREADS must be a number");
            std::process::exit(2);
        }
    }

    let cli = Cli::parse();
    if let Err(e) = cli.run() {
        eprintln!("fairrec: {e}");
        std::process::exit(e.exit_code());
    }
}
