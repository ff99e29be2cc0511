use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde_json::{json, Value};

use super::{load_case, CaseError, CaseFile, Evaluator};
use crate::ratfn::{format_rational, to_decimal, Polynomial, Rational};
use crate::sinv::{Trace, Verdict};

/// How much to render and whether to add decimals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Render {
    pub traces: bool,
    pub decimal: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagRow {
    pub index: usize,
    pub kind: String,
}

/// One computed functional.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResultRow {
    pub flag: usize,
    pub functional: String,
    pub label: String,
    pub value: Option<Rational>,
    pub verdict: Option<Verdict>,
    pub error: Option<String>,
}

/// One expectation against its computed value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub flag: usize,
    pub functional: String,
    pub label: String,
    pub expected: Rational,
    pub expected_verdict: Option<String>,
    pub computed: Option<Rational>,
    pub computed_verdict: Option<Verdict>,
    pub error: Option<String>,
    pub source: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRow {
    pub flag: usize,
    pub functional: String,
    pub label: String,
    pub trace: Trace,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CaseReport {
    pub case: String,
    pub description: String,
    /// Set when the case parsed but its data is inconsistent.
    pub validation_error: Option<String>,
    /// Set when the case could not be read or parsed.
    pub load_error: Option<String>,
    pub warnings: Vec<String>,
    pub flags: Vec<FlagRow>,
    pub results: Vec<ResultRow>,
    pub expected: Vec<Check>,
    pub traces: Vec<TraceRow>,
}

impl CaseReport {
    pub fn load_error(name: &str, err: &CaseError) -> Self {
        Self { case: name.into(), load_error: Some(err.to_string()), ..Self::default() }
    }

    pub fn passed(&self) -> bool {
        self.load_error.is_none() && self.validation_error.is_none() && self.expected.iter().all(|c| c.passed)
    }

    pub fn status(&self) -> &'static str {
        if self.load_error.is_some() {
            "LOAD_ERROR"
        } else if self.validation_error.is_some() {
            "VALIDATION_ERROR"
        } else if self.passed() {
            "PASS"
        } else {
            "FAIL"
        }
    }

    pub fn n_passed(&self) -> usize {
        self.expected.iter().filter(|c| c.passed).count()
    }

    pub fn to_json(&self, opts: Render) -> Value {
        let q = |r: &Rational| rational_json(r, opts.decimal);
        let oq = |r: &Option<Rational>| r.as_ref().map_or(Value::Null, q);
        let results: Vec<Value> = self
            .results
            .iter()
            .map(|r| {
                json!({
                    "flag": r.flag,
                    "functional": r.functional,
                    "label": r.label,
                    "value": oq(&r.value),
                    "verdict": r.verdict.map(|v| v.to_string()),
                    "error": r.error,
                })
            })
            .collect();
        let expected: Vec<Value> = self
            .expected
            .iter()
            .map(|c| {
                json!({
                    "flag": c.flag,
                    "functional": c.functional,
                    "label": c.label,
                    "expected": q(&c.expected),
                    "expected_verdict": c.expected_verdict,
                    "computed": oq(&c.computed),
                    "computed_verdict": c.computed_verdict.map(|v| v.to_string()),
                    "diff": c.computed.as_ref().map(|v| format_rational(&(v - &c.expected))),
                    "error": c.error,
                    "source": c.source,
                    "status": if c.passed { "PASS" } else { "FAIL" },
                })
            })
            .collect();
        let traces: Vec<Value> = if opts.traces {
            self.traces
                .iter()
                .map(|t| json!({"flag": t.flag, "functional": t.functional, "label": t.label, "terms": trace_json(&t.trace)}))
                .collect()
        } else {
            Vec::new()
        };
        json!({
            "case": {
                "name": self.case,
                "description": self.description,
                "status": self.status(),
                "load_error": self.load_error,
                "validation_error": self.validation_error,
                "warnings": self.warnings,
            },
            "flags": self.flags.iter().map(|f| json!({"index": f.index, "kind": f.kind})).collect::<Vec<_>>(),
            "expected": expected,
            "results": results,
            "traces": traces,
        })
    }

    pub fn render_text(&self, opts: Render) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "case {}: {}", self.case, self.status());
        if !self.description.is_empty() {
            let _ = writeln!(out, "  {}", self.description);
        }
        if let Some(e) = &self.load_error {
            let _ = writeln!(out, "  load error: {e}");
            return out;
        }
        if let Some(e) = &self.validation_error {
            let _ = writeln!(out, "  {e}");
            return out;
        }
        for w in &self.warnings {
            let _ = writeln!(out, "  warning: {w}");
        }
        for c in &self.expected {
            let mut line = format!("  [{}] {} = ", c.flag, c.label);
            match &c.computed {
                Some(v) => line.push_str(&rational_text(v, opts.decimal)),
                None if c.error.is_none() => line.push_str("unbounded"),
                None => line.push_str("ERROR"),
            }
            if let Some(v) = c.computed_verdict {
                let _ = write!(line, " {v}");
            }
            if c.passed {
                line.push_str(" PASS");
            } else {
                let _ = write!(line, " FAIL (expected {}", rational_text(&c.expected, opts.decimal));
                if let Some(v) = &c.expected_verdict {
                    let _ = write!(line, " {v}");
                }
                if let Some(v) = &c.computed {
                    let _ = write!(line, ", diff {}", format_rational(&(v - &c.expected)));
                }
                if let Some(e) = &c.error {
                    let _ = write!(line, ": {e}");
                }
                line.push(')');
            }
            let _ = writeln!(out, "{line}");
        }
        let _ = writeln!(out, "  {}/{} expectations pass", self.n_passed(), self.expected.len());
        if opts.traces {
            for t in &self.traces {
                let _ = writeln!(out, "  trace [{}] {}:", t.flag, t.label);
                for l in t.trace.to_string().lines() {
                    let _ = writeln!(out, "    {l}");
                }
            }
        }
        out
    }
}

pub fn rational_text(r: &Rational, decimal: Option<usize>) -> String {
    match decimal {
        Some(d) => format!("{} (~{})", format_rational(r), to_decimal(r, d)),
        None => format_rational(r),
    }
}

fn rational_json(r: &Rational, decimal: Option<usize>) -> Value {
    match decimal {
        Some(d) => json!({"exact": format_rational(r), "decimal": to_decimal(r, d)}),
        None => Value::String(format_rational(r)),
    }
}

fn poly_json(p: &Polynomial) -> Value {
    p.coeffs().iter().map(|c| Value::String(format_rational(c))).collect()
}

pub fn trace_json(t: &Trace) -> Value {
    t.terms
        .iter()
        .map(|term| {
            let pieces: Vec<Value> = term
                .integrand
                .pieces()
                .map(|(lo, hi, p)| {
                    json!({"u_lo": format_rational(lo), "u_hi": format_rational(hi), "coeffs": poly_json(p), "poly": p.to_string()})
                })
                .collect();
            let inner: Vec<Value> = term
                .inner
                .iter()
                .map(|piece| {
                    let chambers = piece.chambers.as_ref().map(|chs| {
                        chs.iter()
                            .map(|ch| {
                                json!({
                                    "v_lo": ch.v_lo.to_string(),
                                    "v_hi": ch.v_hi.to_string(),
                                    "integrand": ch.integrand.to_string(),
                                })
                            })
                            .collect::<Vec<_>>()
                    });
                    json!({"u_lo": format_rational(&piece.u_lo), "u_hi": format_rational(&piece.u_hi), "chambers": chambers})
                })
                .collect();
            json!({
                "label": term.label,
                "prefactor": format_rational(&term.prefactor),
                "value": format_rational(&term.value()),
                "pieces": pieces,
                "inner": inner,
            })
        })
        .collect()
}

/// Evaluates every functional named in the expectations, flags by index and
/// functionals alphabetically.
pub fn run_case(case: &CaseFile) -> CaseReport {
    let ev = Evaluator::new(case);
    let requested: BTreeSet<(usize, &str)> = case.spec.expected.iter().map(|e| (e.flag, e.functional.as_str())).collect();

    let mut results = Vec::new();
    let mut traces = Vec::new();
    for &(flag, functional) in &requested {
        let row = match ev.evaluate(flag, functional) {
            Ok(e) => {
                if let Some(t) = e.trace.clone() {
                    traces.push(TraceRow { flag, functional: functional.into(), label: e.label.clone(), trace: t });
                }
                ResultRow { flag, functional: functional.into(), label: e.label, value: e.value, verdict: e.verdict, error: None }
            }
            Err(err) => ResultRow {
                flag,
                functional: functional.into(),
                label: functional.into(),
                value: None,
                verdict: None,
                error: Some(err.to_string()),
            },
        };
        results.push(row);
    }

    let mut expected: Vec<Check> = case
        .spec
        .expected
        .iter()
        .map(|e| {
            let r = results.iter().find(|r| r.flag == e.flag && r.functional == e.functional).expect("every expectation was evaluated");
            let value_ok = r.error.is_none() && r.value.as_ref() == Some(&e.value.0);
            let verdict_ok = match &e.verdict {
                Some(v) => r.verdict.is_some_and(|c| &c.to_string() == v),
                None => true,
            };
            Check {
                flag: e.flag,
                functional: e.functional.clone(),
                label: r.label.clone(),
                expected: e.value.0.clone(),
                expected_verdict: e.verdict.clone(),
                computed: r.value.clone(),
                computed_verdict: r.verdict,
                error: r.error.clone(),
                source: e.source.clone(),
                passed: value_ok && verdict_ok,
            }
        })
        .collect();
    expected.sort_by(|a, b| (a.flag, &a.functional).cmp(&(b.flag, &b.functional)));

    CaseReport {
        case: case.spec.name.clone(),
        description: case.spec.description.clone(),
        validation_error: None,
        load_error: None,
        warnings: case.warnings.clone(),
        flags: case.flags.iter().enumerate().map(|(i, f)| FlagRow { index: i, kind: f.kind_name().into() }).collect(),
        results,
        expected,
        traces,
    }
}

/// Loads and runs a case. Validation failures become a report with nothing
/// evaluated; parse and schema failures are returned.
pub fn run_bytes(name: &str, bytes: &[u8]) -> Result<CaseReport, CaseError> {
    match load_case(bytes) {
        Ok(case) => Ok(run_case(&case)),
        Err(CaseError::Validation(msg)) => {
            let (case, description) = super::parse_case(bytes).map_or((name.into(), String::new()), |s| (s.name, s.description));
            Ok(CaseReport {
                case,
                description,
                validation_error: Some(format!("validation error: {msg}")),
                ..CaseReport::default()
            })
        }
        Err(e) => Err(e),
    }
}
