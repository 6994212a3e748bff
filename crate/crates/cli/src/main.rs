use clap::Parser;

fn main() {
    let cli = coxnet_cli::Cli::parse();
    match coxnet_cli::run(&cli) {
        Ok(summary) => println!("{summary}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
