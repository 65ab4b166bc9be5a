use clap::Parser;

fn main() {
    let cli = dsff_lab::Cli::parse();
    if let Err(e) = dsff_lab::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
