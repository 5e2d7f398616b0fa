use clap::Parser;

fn main() {
    let cli = mixbf_cli::Cli::parse();
    let code = mixbf_cli::run(&cli, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
