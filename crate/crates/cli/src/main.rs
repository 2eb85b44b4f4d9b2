mod args;
mod commands;
mod error;
mod manifest;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Outcome;
use error::CliError;
use manifest::{digest_file, manifest_path, read_manifest, sha256_hex, write_atomic, FileDigest, RunManifest};

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Discretize(_) => "discretize",
        Command::SuggestBins(_) => "suggest-bins",
        Command::Learn(_) => "learn",
        Command::Fit(_) => "fit",
        Command::Compare(_) => "compare",
        Command::Infer(_) => "infer",
        Command::Impact(_) => "impact",
        Command::Sample(_) => "sample",
        Command::Export(_) => "export",
        Command::Replay(_) => "replay",
    }
}

fn run_command(c: &Command) -> Result<Outcome, CliError> {
    match c {
        Command::Discretize(a) => commands::discretize_cmd(a),
        Command::SuggestBins(a) => commands::suggest_bins_cmd(a),
        Command::Learn(a) => commands::learn_cmd(a),
        Command::Fit(a) => commands::fit_cmd(a),
        Command::Compare(a) => commands::compare_cmd(a),
        Command::Infer(a) => commands::infer_cmd(a),
        Command::Impact(a) => commands::impact_cmd(a),
        Command::Sample(a) => commands::sample_cmd(a),
        Command::Export(a) => commands::export_cmd(a),
        Command::Replay(_) => unreachable!("replay is dispatched separately"),
    }
}

/// Write every output, then the manifest next to the primary one.
fn commit(name: &str, args: &[String], out: &Outcome) -> Result<(), CliError> {
    let Some((primary, _)) = out.outputs.first() else {
        return Ok(());
    };
    let inputs = out.inputs.iter().map(|p| digest_file(p)).collect::<Result<Vec<_>, _>>()?;
    let mut outputs = Vec::with_capacity(out.outputs.len());
    for (path, bytes) in &out.outputs {
        write_atomic(path, bytes)?;
        outputs.push(FileDigest { path: path.display().to_string(), sha256: sha256_hex(bytes) });
    }
    let manifest = RunManifest {
        command: name.to_string(),
        args: args.to_vec(),
        inputs,
        config: out.config.clone(),
        seed: out.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        outputs,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("serializable");
    text.push('\n');
    write_atomic(&manifest_path(primary), text.as_bytes())
}

fn replay(path: &std::path::Path) -> Result<String, CliError> {
    let m = read_manifest(path)?;
    for d in &m.inputs {
        let now = digest_file(std::path::Path::new(&d.path))?;
        if now.sha256 != d.sha256 {
            return Err(CliError::Data { code: "InputChanged", message: format!("{} no longer matches the manifest", d.path) });
        }
    }
    let argv = std::iter::once(OsString::from("cpscausal")).chain(m.args.iter().map(OsString::from));
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(CliError::Usage("a manifest cannot replay another replay".into()));
    }
    let out = run_command(&cli.command)?;
    for (want, (path, bytes)) in m.outputs.iter().zip(&out.outputs) {
        if sha256_hex(bytes) != want.sha256 {
            return Err(CliError::Model {
                code: "ReplayMismatch",
                message: format!("{} differs from the recorded output", path.display()),
            });
        }
    }
    if m.outputs.len() != out.outputs.len() {
        return Err(CliError::Model { code: "ReplayMismatch", message: "output count changed".into() });
    }
    commit(&m.command, &m.args, &out)?;
    Ok(format!("replayed `{}`: {} outputs identical\n", m.command, out.outputs.len()))
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match &cli.command {
        Command::Replay(a) => replay(&a.manifest),
        c => run_command(c).and_then(|out| {
            commit(command_name(c), &args, &out)?;
            Ok(out.stdout)
        }),
    };
    match result {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
