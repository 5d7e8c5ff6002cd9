//! Library half of the command line front end: the textual syntax and
//! the command implementations, kept separate from argument parsing so
//! they can be driven directly from tests.

pub mod text;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rsfkit_core::equiv;
use rsfkit_core::host::Val;
use rsfkit_core::molholes::Program;
use rsfkit_core::rewrite::{collapse, normalize, translate};
use rsfkit_core::typecheck;

/// Seed used when neither `--seed` nor `RSFKIT_SEED` is given.
pub const DEFAULT_SEED: u64 = 0x5eed_0001;

/// A completed command: text for standard output plus the exit code
/// (0 success, 1 check/law failure).
pub struct CmdResult {
    pub stdout: String,
    pub code: i32,
}

impl CmdResult {
    fn ok(stdout: String) -> CmdResult {
        CmdResult { stdout, code: 0 }
    }

    fn failed(stdout: String) -> CmdResult {
        CmdResult { stdout, code: 1 }
    }
}

/// A usage or input error; printed to standard error with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn load_program(file: &Path) -> Result<Program, UsageError> {
    let source = fs::read_to_string(file)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", file.display())))?;
    text::parse_program(&source)
        .map_err(|e| UsageError(format!("{}: {e}", file.display())))
}

/// `check FILE`: print the verdict and diagnostics.
pub fn cmd_check(file: &Path) -> Result<CmdResult, UsageError> {
    let program = load_program(file)?;
    let report = typecheck::well_typed(&program);
    if report.ok {
        Ok(CmdResult::ok("well-typed\n".to_string()))
    } else {
        let mut out = String::from("ill-typed\n");
        for diag in &report.diagnostics {
            let _ = writeln!(out, "  {diag}");
        }
        Ok(CmdResult::failed(out))
    }
}

/// `normalize FILE`: print the normal-form term.
pub fn cmd_normalize(file: &Path) -> Result<CmdResult, UsageError> {
    let program = load_program(file)?;
    let nf = normalize(&program.term);
    Ok(CmdResult::ok(format!("{}\n", text::render_normal_form(&nf))))
}

/// `translate FILE`: print the pure stream transformer of the collapsed
/// program.
pub fn cmd_translate(file: &Path) -> Result<CmdResult, UsageError> {
    let program = load_program(file)?;
    let collapsed = match collapse(&program) {
        Ok(c) => c,
        Err(e) => return Ok(CmdResult::failed(format!("{e}\n"))),
    };
    let term = translate(&collapsed).expect("collapse emits the collapsed shape");
    Ok(CmdResult::ok(format!("{}\n", text::render_sf_term(&term))))
}

/// `run FILE --steps N [--inputs FILE]`: one output row per line.
pub fn cmd_run(file: &Path, steps: usize, inputs: Option<&Path>) -> Result<CmdResult, UsageError> {
    let program = load_program(file)?;
    let rows: Vec<Vec<Val>> = if program.inputs.is_empty() {
        (0..steps).map(|_| Vec::new()).collect()
    } else {
        let path = inputs.ok_or_else(|| {
            UsageError("program declares inputs; --inputs FILE is required".to_string())
        })?;
        let source = fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
        let rows: Vec<Vec<Val>> = source
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(text::parse_row)
            .collect::<Result<_, _>>()
            .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        if steps > rows.len() {
            return Err(UsageError(format!(
                "--steps {steps} exceeds the {} input rows (allowed only without inputs)",
                rows.len()
            )));
        }
        rows.into_iter().take(steps).collect()
    };
    match program.run(&rows) {
        Ok(out) => {
            let mut text = String::new();
            for row in out {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(text, "{}", cells.join(" "));
            }
            Ok(CmdResult::ok(text))
        }
        Err(e) => Ok(CmdResult::failed(format!("runtime error: {e}\n"))),
    }
}

/// `laws [--samples N] [--seed S]`: one line per catalog entry.
/// Positive entries must pass; `-neg-` entries are expected to fail
/// (they witness that internal-only laws break on input/output
/// resources), and the exit code reflects those expectations.
pub fn cmd_laws(samples: usize, seed: u64) -> CmdResult {
    let reports = equiv::law_suite(samples, seed);
    let mut out = String::new();
    let mut ok = true;
    for report in &reports {
        let _ = writeln!(out, "{}", report.line());
        let expected = if equiv::is_negative(&report.law) {
            // With no samples there is nothing to witness.
            samples == 0 || !report.passed()
        } else {
            report.passed()
        };
        ok &= expected;
    }
    if ok {
        CmdResult::ok(out)
    } else {
        CmdResult::failed(out)
    }
}

/// `crosscheck FILE [--steps N] [--samples N] [--seed S]`.
pub fn cmd_crosscheck(
    file: &Path,
    steps: usize,
    samples: usize,
    seed: u64,
) -> Result<CmdResult, UsageError> {
    let program = load_program(file)?;
    match equiv::cross_check(&program, steps, samples, seed) {
        Ok(report) => {
            let out = format!("{}\n", report.line());
            if report.passed() {
                Ok(CmdResult::ok(out))
            } else {
                Ok(CmdResult::failed(out))
            }
        }
        Err(e) => Ok(CmdResult::failed(format!("{e}\n"))),
    }
}

/// Resolve the suite seed: explicit flag, then `RSFKIT_SEED`, then the
/// built-in default.
pub fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("RSFKIT_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(DEFAULT_SEED)
}
