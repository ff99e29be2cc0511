use std::fmt;

use num_traits::{One, Signed, Zero};

use super::trace::{Trace, TraceTerm};
use super::{InvariantResult, SinvError};
use crate::lattice::{DivisorClass, LatticeError, SurfaceGeometry};
use crate::ratfn::{format_rational, int, rat, PiecewisePolynomial, Polynomial, Rational};
use crate::zariski::{pseff_threshold, walk};

fn curve_class(geom: &SurfaceGeometry, c: &str) -> Result<DivisorClass, SinvError> {
    let class = geom
        .curve(c)
        .ok_or_else(|| LatticeError::UnknownCurve(c.into()))?
        .class
        .clone();
    if class.is_zero() {
        return Err(SinvError::ZeroClass(c.into()));
    }
    Ok(class)
}

/// `1 − (1/K_S²)·∫₀^τ vol(−K_S − uC) du`.
pub fn beta_curve(geom: &SurfaceGeometry, c: &str) -> Result<InvariantResult, SinvError> {
    let class = curve_class(geom, c)?;
    let mk = geom.minus_k();
    let k2 = geom.intersect(&mk, &mk)?.coeff(0);
    let w = walk(geom, &mk, &class)?;
    let mut bps = vec![Rational::zero()];
    let mut segs = Vec::new();
    for ch in &w.chambers {
        bps.push(ch.v_hi.clone());
        segs.push(ch.volume.clone());
    }
    let mut terms = vec![TraceTerm {
        label: "1".into(),
        prefactor: Rational::one(),
        integrand: PiecewisePolynomial::single(int(0), int(1), Polynomial::one())?,
        inner: Vec::new(),
    }];
    if !segs.is_empty() {
        terms.push(TraceTerm {
            label: format!("vol(-K_S - u{c})"),
            prefactor: -Rational::one() / &k2,
            integrand: PiecewisePolynomial::new(bps, segs)?,
            inner: Vec::new(),
        });
    }
    let trace = Trace { terms };
    Ok(InvariantResult { value: trace.reintegrate(), trace, verdict: None })
}

/// `min 1/τ(C)` over the supplied curves, `τ(C)` the pseudoeffective
/// threshold of `−K_S − uC`.
pub fn tau_alpha_upper(geom: &SurfaceGeometry, curves: &[String]) -> Result<Rational, SinvError> {
    if curves.is_empty() {
        return Err(SinvError::MissingPart("no curves supplied".into()));
    }
    let mk = geom.minus_k();
    let mut best: Option<Rational> = None;
    for c in curves {
        let tau = pseff_threshold(geom, &mk, &curve_class(geom, c)?)?;
        if !tau.is_positive() {
            return Err(SinvError::NonPositive(format!("tau({c}) = {}", format_rational(&tau))));
        }
        let r = Rational::one() / tau;
        if best.as_ref().is_none_or(|b| &r < b) {
            best = Some(r);
        }
    }
    Ok(best.unwrap())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    GreaterThanOne,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::GreaterThanOne => "GREATER_THAN_ONE",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// One `A/S` ratio. `value` is `S`; `None` when it was not computed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundPart {
    pub label: String,
    pub log_discrepancy: Rational,
    pub value: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundVerdict {
    /// Minimum of the ratios; `None` when every `S` is 0.
    pub value: Option<Rational>,
    pub verdict: Verdict,
    /// Label of the part attaining the minimum.
    pub limiting: Option<String>,
}

/// `min A/S` over the supplied parts. `S = 0` counts as an infinite ratio.
pub fn delta_bound(parts: &[BoundPart]) -> Result<BoundVerdict, SinvError> {
    if parts.is_empty() {
        return Err(SinvError::MissingPart("no parts supplied".into()));
    }
    let mut best: Option<(Rational, &str)> = None;
    let mut all_above = true;
    for p in parts {
        let s = p.value.as_ref().ok_or_else(|| SinvError::MissingPart(p.label.clone()))?;
        if s.is_negative() {
            return Err(SinvError::NonPositive(format!("{} = {}", p.label, format_rational(s))));
        }
        if s.is_zero() {
            continue;
        }
        let r = &p.log_discrepancy / s;
        if r <= Rational::one() {
            all_above = false;
        }
        if best.as_ref().is_none_or(|(b, _)| &r < b) {
            best = Some((r, &p.label));
        }
    }
    Ok(BoundVerdict {
        verdict: if all_above { Verdict::GreaterThanOne } else { Verdict::Inconclusive },
        limiting: best.as_ref().map(|(_, l)| l.to_string()),
        value: best.map(|(r, _)| r),
    })
}

/// `min{16/11, (16/15)δ}` off the exceptional divisor, `min{16/11, 16δ/(δ + 15)}` on it.
pub fn fiber_delta_bound(delta_s: &Rational, on_exceptional: bool) -> Result<Rational, SinvError> {
    if !delta_s.is_positive() {
        return Err(SinvError::NonPositive(format!("delta = {}", format_rational(delta_s))));
    }
    let g = if on_exceptional {
        int(16) * delta_s / (delta_s + int(15))
    } else {
        rat(16, 15) * delta_s
    };
    Ok(g.min(rat(16, 11)))
}
