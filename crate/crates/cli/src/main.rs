use clap::Parser;

fn main() {
    let cli = kframe_cli::Cli::try_parse().unwrap_or_else(|e| {
        let code = if e.use_stderr() { kframe_cli::EXIT_INPUT } else { 0 };
        let _ = e.print();
        std::process::exit(code);
    });
    std::process::exit(kframe_cli::execute(&cli));
}
