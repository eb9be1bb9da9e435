mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{merge_config, Cli};
use commands::CliError;

fn fail(code: u8, name: &str, msg: &str) -> ExitCode {
    eprintln!("error: {name}: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let argv = match merge_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(msg) => return fail(1, "Usage", &msg),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            return fail(1, "Usage", &format!("cannot size the worker pool: {e}"));
        }
    }
    let Some(path) = &cli.domain else {
        return fail(1, "Usage", "--domain <file> is required (JSON domain spec)");
    };
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => return fail(1, "Io", &format!("cannot read domain {}: {e}", path.display())),
    };
    let domain = match corank::ModelDomain::load(path) {
        Ok(d) => d,
        Err(e) => return fail(1, e.name(), &e.to_string()),
    };
    let hash = output::config_hash(&cli, &bytes);
    let artifact = match commands::run(&cli.command, &domain, cli.seed) {
        Ok(a) => a,
        Err(CliError::Usage(msg)) => return fail(1, "Usage", &msg),
        Err(CliError::Core(e)) => return fail(if e.is_solver_failure() { 2 } else { 1 }, e.name(), &e.to_string()),
    };
    let mut buf = Vec::new();
    output::write_artifact(&mut buf, artifact, cli.format, cli.command.name(), &hash).expect("writing to memory");
    let written = match &cli.out {
        Some(p) => std::fs::write(p, &buf),
        None => std::io::stdout().write_all(&buf),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(1, "Io", &format!("cannot write output: {e}")),
    }
}
