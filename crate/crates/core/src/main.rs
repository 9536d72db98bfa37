//! `adia-check` command line front end.
//!
//! Subcommands:
//!   run <config>        run a scenario config file
//!   fig1 [--steps N] [--out PATH]
//!   lzt --omega X --sweep Y --window T [--steps N] [--substeps N] [--out PATH]
//!   ensemble <config>   run an ensemble scenario config file
//!
//! Exit codes: 0 success, 2 config/usage errors, 3 propagation failures,
//! 1 anything else.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adia_check::error::AdiaError;
use adia_check::scenario::{self, CsvReport};

const USAGE: &str = "\
adia-check — exact vs adiabatic-frame propagation diagnostics for two-level systems

USAGE:
    adia-check run <config-path>
    adia-check fig1 [--steps N] [--out PATH]
    adia-check lzt --omega X --sweep Y --window T [--steps N] [--substeps N] [--out PATH]
    adia-check ensemble <config-path>

Output is CSV (`# adia-check csv v1`) on stdout unless --out or the config's
[output] path says otherwise. ADIA_CHECK_THREADS caps internal parallelism.
";

fn exit_code_for(err: &AdiaError) -> u8 {
    match err {
        AdiaError::Config { .. } | AdiaError::InvalidArgument(_) => 2,
        AdiaError::IntegrationDiverged { .. } | AdiaError::DegenerateSpectrum { .. } => 3,
        AdiaError::UnsupportedModel { .. } => 2,
        AdiaError::EnsembleMember { source, .. } => exit_code_for(source),
        AdiaError::Io { .. } => 1,
    }
}

fn fail(err: AdiaError) -> ExitCode {
    eprintln!("adia-check: error: {err}");
    ExitCode::from(exit_code_for(&err))
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("adia-check: error: {msg}\n\n{USAGE}");
    ExitCode::from(2)
}

/// Emit the report to `--out`, the config's output path, or stdout.
fn emit(report: &CsvReport, out: Option<&Path>) -> Result<(), AdiaError> {
    match out {
        Some(path) => report.write_to(path),
        None => {
            print!("{}", report.to_csv_string());
            Ok(())
        }
    }
}

struct Flags {
    named: Vec<(String, String)>,
    positional: Vec<String>,
}

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut named = Vec::new();
    let mut positional = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        if let Some(name) = arg.strip_prefix("--") {
            let value = it
                .next()
                .ok_or_else(|| format!("flag --{name} needs a value"))?;
            named.push((name.to_string(), value.clone()));
        } else {
            positional.push(arg.clone());
        }
    }
    Ok(Flags { named, positional })
}

impl Flags {
    fn get(&self, name: &str) -> Option<&str> {
        self.named
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }

    fn get_f64(&self, name: &str) -> Result<Option<f64>, String> {
        match self.get(name) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| format!("--{name}: not a number: `{v}`")),
        }
    }

    fn get_usize(&self, name: &str) -> Result<Option<usize>, String> {
        match self.get(name) {
            None => Ok(None),
            Some(v) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| format!("--{name}: not a non-negative integer: `{v}`")),
        }
    }

    fn unknown_flag(&self, allowed: &[&str]) -> Option<&str> {
        self.named
            .iter()
            .map(|(n, _)| n.as_str())
            .find(|n| !allowed.contains(n))
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first().map(String::as_str) else {
        return usage_error("missing subcommand");
    };
    let rest = &args[1..];

    match command {
        "-h" | "--help" | "help" => {
            print!("{USAGE}");
            ExitCode::SUCCESS
        }
        "run" | "ensemble" => {
            let flags = match parse_flags(rest) {
                Ok(f) => f,
                Err(m) => return usage_error(&m),
            };
            if let Some(bad) = flags.unknown_flag(&["out"]) {
                return usage_error(&format!("unknown flag --{bad}"));
            }
            let [config_path] = flags.positional.as_slice() else {
                return usage_error(&format!("{command} takes exactly one config path"));
            };
            let config = match scenario::load_config(Path::new(config_path)) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let report = if command == "ensemble" {
                scenario::cmd_ensemble(&config)
            } else {
                scenario::run_scenario(&config)
            };
            let report = match report {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            let out_flag = flags.get("out").map(PathBuf::from);
            let out = out_flag.as_deref().or(config.output.as_deref());
            match emit(&report, out) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(e),
            }
        }
        "fig1" => {
            let flags = match parse_flags(rest) {
                Ok(f) => f,
                Err(m) => return usage_error(&m),
            };
            if let Some(bad) = flags.unknown_flag(&["steps", "out"]) {
                return usage_error(&format!("unknown flag --{bad}"));
            }
            if !flags.positional.is_empty() {
                return usage_error("fig1 takes no positional arguments");
            }
            let steps = match flags.get_usize("steps") {
                Ok(s) => s.unwrap_or(4000),
                Err(m) => return usage_error(&m),
            };
            match scenario::cmd_fig1(steps) {
                Ok(report) => {
                    let out = flags.get("out").map(PathBuf::from);
                    match emit(&report, out.as_deref()) {
                        Ok(()) => ExitCode::SUCCESS,
                        Err(e) => fail(e),
                    }
                }
                Err(e) => fail(e),
            }
        }
        "lzt" => {
            let flags = match parse_flags(rest) {
                Ok(f) => f,
                Err(m) => return usage_error(&m),
            };
            if let Some(bad) = flags.unknown_flag(&["omega", "sweep", "window", "steps", "substeps", "out"])
            {
                return usage_error(&format!("unknown flag --{bad}"));
            }
            if !flags.positional.is_empty() {
                return usage_error("lzt takes no positional arguments");
            }
            struct LztArgs {
                omega: f64,
                sweep: f64,
                window: f64,
                steps: Option<usize>,
                substeps: Option<usize>,
            }
            let parsed = (|| -> Result<LztArgs, String> {
                Ok(LztArgs {
                    omega: flags
                        .get_f64("omega")?
                        .ok_or_else(|| "lzt requires --omega".to_string())?,
                    sweep: flags
                        .get_f64("sweep")?
                        .ok_or_else(|| "lzt requires --sweep".to_string())?,
                    window: flags
                        .get_f64("window")?
                        .ok_or_else(|| "lzt requires --window".to_string())?,
                    steps: flags.get_usize("steps")?,
                    substeps: flags.get_usize("substeps")?,
                })
            })();
            let args = match parsed {
                Ok(p) => p,
                Err(m) => return usage_error(&m),
            };
            let (omega, sweep, window, steps, substeps) =
                (args.omega, args.sweep, args.window, args.steps, args.substeps);
            match scenario::cmd_lzt(omega, sweep, window, steps, substeps) {
                Ok(report) => {
                    let last = report.rows().len() - 1;
                    if let Some(q) = report.value(last, "q_numeric") {
                        eprintln!("adia-check: lzt final Q = {q:.6}");
                    }
                    let out = flags.get("out").map(PathBuf::from);
                    match emit(&report, out.as_deref()) {
                        Ok(()) => ExitCode::SUCCESS,
                        Err(e) => fail(e),
                    }
                }
                Err(e) => fail(e),
            }
        }
        other => usage_error(&format!("unknown subcommand `{other}`")),
    }
}
