use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use stabapprox_cli::{args::Cli, run};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let status = run(&cli, &mut out);
    let flushed = out.flush();
    match status.and(flushed.map_err(Into::into)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
