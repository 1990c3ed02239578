use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = acoa_cli::Cli::parse();
    acoa_cli::init_logging(cli.log_level);
    let mut stdout = std::io::stdout().lock();
    match acoa_cli::run(cli, &mut stdout) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
