use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use decay_focus_cli::{run_command, Cli, ExperimentSpec};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let (mut out, mut err) = (stdout.lock(), stderr.lock());
    match ExperimentSpec::from_cli(cli).and_then(|spec| run_command(&spec, &mut out, &mut err)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
