use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use kflag::cases::{self, rational_text, trace_json, CaseError, CaseFile, CaseReport, EvalError, Render};
use kflag::lattice::{DivisorClass, SurfaceGeometry};
use kflag::ratfn::{format_rational, parse_rational, to_decimal, Rational};
use kflag::zariski;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::{Cli, Command, Format, Outcome};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn usage(msg: impl std::fmt::Display) -> Outcome {
    eprintln!("kflag: {msg}");
    Outcome { report: String::new(), code: EXIT_USAGE }
}

fn failure(msg: impl std::fmt::Display) -> Outcome {
    eprintln!("kflag: {msg}");
    Outcome { report: String::new(), code: EXIT_FAIL }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// `--cases`, then `$KFLAG_CASES`, then a `cases` directory next to the
/// executable, then the source tree.
pub fn case_dir(cli: &Cli) -> PathBuf {
    if let Some(d) = &cli.cases {
        return d.clone();
    }
    if let Some(d) = std::env::var_os("KFLAG_CASES").filter(|d| !d.is_empty()) {
        return PathBuf::from(d);
    }
    if let Some(exe_dir) = std::env::current_exe().ok().and_then(|e| e.parent().map(Path::to_path_buf)) {
        for candidate in [exe_dir.join("cases"), exe_dir.join("../share/kflag/cases")] {
            if candidate.is_dir() {
                return candidate;
            }
        }
    }
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/cases")
}

fn case_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "case"))
        .collect();
    files.sort();
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn resolve(cli: &Cli, case: &str) -> PathBuf {
    let p = PathBuf::from(case);
    if p.exists() {
        return p;
    }
    let dir = case_dir(cli);
    let named = dir.join(format!("{case}.case"));
    if named.exists() {
        named
    } else {
        p
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CaseError> {
    std::fs::read(path).map_err(|e| CaseError::Io(e.to_string()))
}

fn render(cli: &Cli) -> Render {
    Render { traces: cli.trace, decimal: cli.decimal }
}

pub fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::List => list(cli),
        Command::Run { case } => run(cli, case),
        Command::VerifyAll => verify_all(cli),
        Command::Eval { case, flag, functional } => eval(cli, case, *flag, functional),
        Command::Decompose { case, class, flag } => surface_query(cli, case, *flag, |g| decompose(cli, g, class)),
        Command::Volume { case, class, flag } => surface_query(cli, case, *flag, |g| volume(cli, g, class)),
        Command::Threshold { case, class, curve, flag } => {
            surface_query(cli, case, *flag, |g| threshold(cli, g, class, curve))
        }
    }
}

fn list(cli: &Cli) -> Outcome {
    let dir = case_dir(cli);
    let files = match case_files(&dir) {
        Ok(f) => f,
        Err(e) => return usage(format!("cannot read case directory {}: {e}", dir.display())),
    };
    let rows: Vec<(String, Result<(String, usize), CaseError>)> = files
        .iter()
        .map(|p| (stem(p), read(p).and_then(|b| cases::parse_case(&b)).map(|s| (s.description, s.expected.len()))))
        .collect();
    for (name, r) in &rows {
        if let Err(e) = r {
            eprintln!("kflag: {name}: {e}");
        }
    }
    let report = match cli.format {
        Format::Json => json_text(&json!({
            "cases": rows.iter().map(|(name, r)| match r {
                Ok((d, n)) => json!({"name": name, "description": d, "expected": n}),
                Err(e) => json!({"name": name, "error": e.to_string()}),
            }).collect::<Vec<_>>()
        })),
        Format::Text => {
            let mut s = String::new();
            for (name, r) in &rows {
                match r {
                    Ok((d, n)) => writeln!(s, "{name}  {n} expected  {d}"),
                    Err(_) => writeln!(s, "{name}  LOAD_ERROR"),
                }
                .unwrap();
            }
            s
        }
    };
    Outcome { report, code: 0 }
}

fn render_report(cli: &Cli, r: &CaseReport) -> String {
    match cli.format {
        Format::Json => json_text(&r.to_json(render(cli))),
        Format::Text => r.render_text(render(cli)),
    }
}

fn run(cli: &Cli, case: &str) -> Outcome {
    let path = resolve(cli, case);
    let report = match read(&path).and_then(|b| cases::run_bytes(&stem(&path), &b)) {
        Ok(r) => r,
        Err(e) => return usage(format!("{}: {e}", path.display())),
    };
    if let Some(e) = &report.validation_error {
        eprintln!("kflag: {}: {e}", path.display());
    }
    Outcome { report: render_report(cli, &report), code: if report.passed() { 0 } else { EXIT_FAIL } }
}

fn verify_all(cli: &Cli) -> Outcome {
    let dir = case_dir(cli);
    let files = match case_files(&dir) {
        Ok(f) => f,
        Err(e) => return usage(format!("cannot read case directory {}: {e}", dir.display())),
    };
    let reports: Vec<CaseReport> = files
        .par_iter()
        .map(|p| {
            let name = stem(p);
            read(p).and_then(|b| cases::run_bytes(&name, &b)).unwrap_or_else(|e| CaseReport::load_error(&name, &e))
        })
        .collect();
    let mut reports = reports;
    reports.sort_by(|a, b| a.case.cmp(&b.case));
    for r in &reports {
        if let Some(e) = r.load_error.as_ref().or(r.validation_error.as_ref()) {
            eprintln!("kflag: {}: {e}", r.case);
        }
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    let failed = reports.len() - passed;
    let report = match cli.format {
        Format::Json => json_text(&json!({
            "cases": reports.iter().map(|r| r.to_json(render(cli))).collect::<Vec<_>>(),
            "summary": {
                "total": reports.len(),
                "passed": passed,
                "failed": failed,
                "matrix": reports.iter().map(|r| json!({
                    "case": r.case, "status": r.status(), "passed": r.n_passed(), "expected": r.expected.len(),
                })).collect::<Vec<_>>(),
            }
        })),
        Format::Text => {
            let mut s = String::new();
            for r in &reports {
                s.push_str(&r.render_text(render(cli)));
            }
            writeln!(s, "summary: {passed} pass, {failed} fail, {} total", reports.len()).unwrap();
            for r in &reports {
                writeln!(s, "  {:<16} {:<16} {}/{}", r.case, r.status(), r.n_passed(), r.expected.len()).unwrap();
            }
            s
        }
    };
    Outcome { report, code: if failed == 0 { 0 } else { EXIT_FAIL } }
}

fn load(cli: &Cli, case: &str) -> Result<CaseFile, Outcome> {
    let path = resolve(cli, case);
    read(&path).and_then(|b| cases::load_case(&b)).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn eval(cli: &Cli, case: &str, flag: usize, functional: &str) -> Outcome {
    let case = match load(cli, case) {
        Ok(c) => c,
        Err(o) => return o,
    };
    let e = match cases::evaluate(&case, flag, functional) {
        Ok(e) => e,
        Err(err @ EvalError::Computation(_)) => return failure(err),
        Err(err) => return usage(err),
    };
    let report = match cli.format {
        Format::Json => {
            let value = match (&e.value, cli.decimal) {
                (None, _) => Value::Null,
                (Some(v), None) => json!(format_rational(v)),
                (Some(v), Some(d)) => json!({"exact": format_rational(v), "decimal": to_decimal(v, d)}),
            };
            json_text(&json!({
                "case": case.name(),
                "flag": flag,
                "functional": functional,
                "label": e.label,
                "value": value,
                "verdict": e.verdict.map(|v| v.to_string()),
                "trace": match (&e.trace, cli.trace) {
                    (Some(t), true) => trace_json(t),
                    _ => Value::Null,
                },
            }))
        }
        Format::Text => {
            let mut s = String::new();
            let value = e.value.as_ref().map_or("unbounded".to_string(), |v| rational_text(v, cli.decimal));
            write!(s, "[{flag}] {} = {value}", e.label).unwrap();
            if let Some(v) = e.verdict {
                write!(s, " {v}").unwrap();
            }
            s.push('\n');
            if let (Some(t), true) = (&e.trace, cli.trace) {
                s.push_str(&t.to_string());
            }
            s
        }
    };
    Outcome { report, code: 0 }
}

fn surface_query(cli: &Cli, case: &str, flag: Option<usize>, f: impl FnOnce(&SurfaceGeometry) -> Outcome) -> Outcome {
    let case = match load(cli, case) {
        Ok(c) => c,
        Err(o) => return o,
    };
    match flag {
        None => f(&case.surface),
        Some(i) => match case.flags.get(i) {
            Some(fl) => f(&fl.surface),
            None => usage(EvalError::UnknownFlag(i)),
        },
    }
}

/// `name:coeff,...`.
fn parse_class(g: &SurfaceGeometry, text: &str) -> Result<DivisorClass, String> {
    let mut pairs = Vec::new();
    for term in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (name, coeff) = term.split_once(':').ok_or_else(|| format!("expected name:coeff, got {term:?}"))?;
        let c = parse_rational(coeff.trim()).map_err(|e| e.to_string())?;
        let name = name.trim();
        if g.basis_index(name).is_none() {
            return Err(format!("unknown basis name {name:?}; basis is {}", g.basis().join(", ")));
        }
        pairs.push((name.to_string(), c));
    }
    Ok(DivisorClass::from_constants(pairs.iter().map(|(n, c)| (n.as_str(), c.clone()))))
}

fn class_json(g: &SurfaceGeometry, c: &DivisorClass) -> Value {
    let v: serde_json::Map<String, Value> = g
        .basis()
        .iter()
        .map(|b| (b.clone(), json!(format_rational(&c.coeff(b).coeff(0)))))
        .collect();
    Value::Object(v)
}

fn value_text(cli: &Cli, r: &Rational) -> String {
    rational_text(r, cli.decimal)
}

fn decompose(cli: &Cli, g: &SurfaceGeometry, class: &str) -> Outcome {
    let d = match parse_class(g, class) {
        Ok(d) => d,
        Err(e) => return usage(e),
    };
    let z = match zariski::decompose(g, &d) {
        Ok(z) => z,
        Err(e) => return failure(e),
    };
    let report = match cli.format {
        Format::Json => json_text(&json!({
            "positive": class_json(g, &z.positive),
            "negative": z.negative.iter().map(|(c, k)| json!({"curve": c, "coeff": format_rational(k)})).collect::<Vec<_>>(),
        })),
        Format::Text => {
            let mut s = format!("P = {}\n", z.positive);
            if z.negative.is_empty() {
                s.push_str("N = 0\n");
            } else {
                let terms: Vec<String> = z
                    .negative
                    .iter()
                    .map(|(c, k)| if k == &Rational::from_integer(1.into()) { c.clone() } else { format!("{} {c}", value_text(cli, k)) })
                    .collect();
                writeln!(s, "N = {}", terms.join(" + ")).unwrap();
            }
            s
        }
    };
    Outcome { report, code: 0 }
}

fn volume(cli: &Cli, g: &SurfaceGeometry, class: &str) -> Outcome {
    let d = match parse_class(g, class) {
        Ok(d) => d,
        Err(e) => return usage(e),
    };
    match zariski::volume(g, &d) {
        Ok(v) => Outcome {
            report: match cli.format {
                Format::Json => json_text(&json!({"volume": format_rational(&v)})),
                Format::Text => format!("vol = {}\n", value_text(cli, &v)),
            },
            code: 0,
        },
        Err(e) => failure(e),
    }
}

fn threshold(cli: &Cli, g: &SurfaceGeometry, class: &str, curve: &str) -> Outcome {
    let d = match parse_class(g, class) {
        Ok(d) => d,
        Err(e) => return usage(e),
    };
    let Some(c) = g.curve(curve) else {
        return usage(format!("unknown curve {curve:?}"));
    };
    let pseff = zariski::pseff_threshold(g, &d, &c.class);
    let nef = zariski::nef_threshold(g, &d, &c.class);
    match (pseff, nef) {
        (Ok(p), Ok(n)) => Outcome {
            report: match cli.format {
                Format::Json => json_text(&json!({"pseff": format_rational(&p), "nef": format_rational(&n)})),
                Format::Text => format!("pseff threshold = {}\nnef threshold = {}\n", value_text(cli, &p), value_text(cli, &n)),
            },
            code: 0,
        },
        (Err(e), _) | (_, Err(e)) => failure(e),
    }
}
