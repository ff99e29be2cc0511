use std::cell::RefCell;
use std::collections::BTreeMap;

use super::{CaseFile, Flag, FlagKind};
use crate::ratfn::{format_rational, Rational};
use crate::sinv::{self, BoundPart, FlagSpec, FlagVariant, InvariantResult, Trace, Verdict};

/// Every functional name a case may request, sorted.
pub const FUNCTIONALS: &[&str] = &[
    "beta_curve",
    "delta_bound",
    "f_point",
    "fiber_delta_bound",
    "minus_k_cubed",
    "ord_term_bound",
    "s_blowup_divisor",
    "s_blowup_point",
    "s_curve",
    "s_divisor",
    "s_point",
    "s_surface_bound",
    "tau_alpha_upper",
    "volume_term_bound",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("no flag {0}")]
    UnknownFlag(usize),
    #[error("unknown functional {0:?}; valid names: {list}", list = FUNCTIONALS.join(", "))]
    UnknownFunctional(String),
    #[error("{functional} does not apply to flag {flag} ({kind})")]
    NotApplicable { flag: usize, functional: String, kind: String },
    #[error("{0}")]
    Computation(String),
}

impl EvalError {
    /// Bad names rather than a failed computation.
    pub fn is_usage(&self) -> bool {
        !matches!(self, EvalError::Computation(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    /// Display name, e.g. `S_X(S)`.
    pub label: String,
    /// `None` for an unbounded `delta_bound`.
    pub value: Option<Rational>,
    pub verdict: Option<Verdict>,
    pub trace: Option<Trace>,
}

impl Evaluation {
    fn plain(label: String, value: Rational) -> Self {
        Self { label, value: Some(value), verdict: None, trace: None }
    }

    fn traced(label: String, r: InvariantResult) -> Self {
        Self { label, value: Some(r.value), verdict: None, trace: Some(r.trace) }
    }
}

/// Evaluates functionals on one case, caching results.
pub struct Evaluator<'a> {
    case: &'a CaseFile,
    cache: RefCell<BTreeMap<(usize, String), Result<Evaluation, EvalError>>>,
}

fn comp(e: impl ToString) -> EvalError {
    EvalError::Computation(e.to_string())
}

impl<'a> Evaluator<'a> {
    pub fn new(case: &'a CaseFile) -> Self {
        Self { case, cache: RefCell::new(BTreeMap::new()) }
    }

    pub fn evaluate(&self, flag: usize, functional: &str) -> Result<Evaluation, EvalError> {
        let key = (flag, functional.to_string());
        if let Some(r) = self.cache.borrow().get(&key) {
            return r.clone();
        }
        let r = self.compute(flag, functional);
        self.cache.borrow_mut().insert(key, r.clone());
        r
    }

    fn compute(&self, index: usize, functional: &str) -> Result<Evaluation, EvalError> {
        if !FUNCTIONALS.contains(&functional) {
            return Err(EvalError::UnknownFunctional(functional.into()));
        }
        let flag = self.case.flags.get(index).ok_or(EvalError::UnknownFlag(index))?;
        let na = || EvalError::NotApplicable {
            flag: index,
            functional: functional.into(),
            kind: flag.kind_name().into(),
        };
        let ray = || flag.ray.as_ref().ok_or_else(|| comp(format!("flag {index}: {functional} needs a ray")));
        let spec = |variant: &FlagVariant| -> Result<FlagSpec<'_>, EvalError> {
            Ok(FlagSpec::new(ray()?, &flag.surface, variant.clone()))
        };

        match (&flag.kind, functional) {
            (FlagKind::Sinv { variant: FlagVariant::Divisor, .. }, "s_divisor") => {
                let r = ray()?;
                Ok(Evaluation::traced(format!("S_X({})", r.name), sinv::s_divisor(r).map_err(comp)?))
            }
            (FlagKind::Sinv { variant: FlagVariant::Divisor, .. }, "minus_k_cubed") => {
                Ok(Evaluation::plain("(-K_X)^3".into(), sinv::minus_k_cubed(ray()?).map_err(comp)?))
            }
            (FlagKind::Sinv { variant: v @ FlagVariant::Curve { curve, .. }, .. }, "s_curve") => {
                Ok(Evaluation::traced(format!("S(W;{curve})"), sinv::s_curve(&spec(v)?).map_err(comp)?))
            }
            (FlagKind::Sinv { variant: FlagVariant::Curve { curve, .. }, .. }, "beta_curve") => {
                Ok(Evaluation::traced(format!("beta({curve})"), sinv::beta_curve(&flag.surface, curve).map_err(comp)?))
            }
            (FlagKind::Sinv { variant: v @ FlagVariant::Point { point, curve, .. }, .. }, "f_point") => {
                Ok(Evaluation::traced(format!("F_{point}({curve})"), sinv::f_point(&spec(v)?).map_err(comp)?))
            }
            (FlagKind::Sinv { variant: v @ FlagVariant::Point { point, curve, .. }, .. }, "s_point") => {
                Ok(Evaluation::traced(format!("S(W;{curve},{point})"), sinv::s_point(&spec(v)?).map_err(comp)?))
            }
            (FlagKind::Sinv { variant: v @ FlagVariant::Blowup { point, .. }, .. }, "s_blowup_divisor") => {
                Ok(Evaluation::traced(format!("S(W;E_{point})"), sinv::s_blowup_divisor(&spec(v)?).map_err(comp)?))
            }
            (FlagKind::Sinv { variant: v @ FlagVariant::Blowup { point, .. }, target_point }, "s_blowup_point") => {
                let q = target_point
                    .as_deref()
                    .ok_or_else(|| comp(format!("flag {index}: s_blowup_point needs a target_point")))?;
                Ok(Evaluation::traced(format!("S(W;E_{point},{q})"), sinv::s_blowup_point(&spec(v)?, q).map_err(comp)?))
            }
            (FlagKind::SurfaceBound { ord_curve, inverse_delta }, f) => {
                let s = FlagSpec::new(ray()?, &flag.surface, FlagVariant::Divisor);
                let (label, r) = match f {
                    "ord_term_bound" => ("ord term/A", sinv::ord_term_bound(&s, ord_curve)),
                    "volume_term_bound" => ("volume term/A", sinv::volume_term_bound(&s, inverse_delta)),
                    "s_surface_bound" => ("S(W;F)/A", sinv::s_surface_bound(&s, ord_curve, inverse_delta)),
                    _ => return Err(na()),
                };
                Ok(Evaluation::traced(label.into(), r.map_err(comp)?))
            }
            (FlagKind::Curves(curves), "tau_alpha_upper") => Ok(Evaluation::plain(
                "min 1/tau".into(),
                sinv::tau_alpha_upper(&flag.surface, curves).map_err(comp)?,
            )),
            (FlagKind::Fiber { delta, on_exceptional }, "fiber_delta_bound") => Ok(Evaluation::plain(
                format!("fiber delta bound({}{})", format_rational(delta), if *on_exceptional { ", on E" } else { "" }),
                sinv::fiber_delta_bound(delta, *on_exceptional).map_err(comp)?,
            )),
            (FlagKind::Bound(parts), "delta_bound") => {
                let mut ps = Vec::new();
                for p in parts {
                    if p.functional == "delta_bound" {
                        return Err(comp(format!("flag {index}: delta_bound parts must not be delta_bound")));
                    }
                    let target = &self.case.flags[p.flag];
                    let e = self.evaluate(p.flag, &p.functional)?;
                    let a = p.log_discrepancy.clone().unwrap_or_else(|| default_discrepancy(target));
                    ps.push(BoundPart { label: format!("[{}] {}", p.flag, e.label), log_discrepancy: a, value: e.value });
                }
                let b = sinv::delta_bound(&ps).map_err(comp)?;
                Ok(Evaluation { label: "delta bound".into(), value: b.value, verdict: Some(b.verdict), trace: None })
            }
            _ => Err(na()),
        }
    }
}

fn default_discrepancy(flag: &Flag) -> Rational {
    match &flag.kind {
        FlagKind::Sinv { variant, .. } => variant.log_discrepancy(),
        _ => Rational::from_integer(1.into()),
    }
}

/// One-off evaluation without a shared cache.
pub fn evaluate(case: &CaseFile, flag: usize, functional: &str) -> Result<Evaluation, EvalError> {
    Evaluator::new(case).evaluate(flag, functional)
}
