use std::fmt;

use num_traits::{Signed, Zero};

use super::{CurvePairing, DivisorClass, SurfaceGeometry, ThreefoldRay};
use crate::ratfn::{format_rational, rat, Polynomial, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationKind {
    Tiling,
    Identity,
    NegativeCoefficient,
    NotNef,
    Restriction,
    Reference,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Tiling => "tiling",
            Self::Identity => "P+N identity",
            Self::NegativeCoefficient => "negative coefficient",
            Self::NotNef => "not nef",
            Self::Restriction => "restriction",
            Self::Reference => "reference",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub chamber: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.chamber {
            Some(i) => write!(f, "{} (chamber {i}): {}", self.kind, self.detail),
            None => write!(f, "{}: {}", self.kind, self.detail),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, kind: ViolationKind, chamber: Option<usize>, detail: String) {
        self.violations.push(Violation { kind, chamber, detail });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        f.write_str(&lines.join("; "))
    }
}

/// Points where a polynomial's sign on `[lo, hi]` is decided, for degree ≤ 2.
fn critical_points(p: &Polynomial, lo: &Rational, hi: &Rational) -> Vec<Rational> {
    let mut pts = vec![lo.clone(), hi.clone()];
    if p.degree() == Some(2) {
        let vertex = -p.coeff(1) / (p.coeff(2) * rat(2, 1));
        if &vertex > lo && &vertex < hi {
            pts.push(vertex);
        }
    }
    pts
}

fn nonnegative(p: &Polynomial, lo: &Rational, hi: &Rational) -> Option<Rational> {
    critical_points(p, lo, hi).into_iter().find(|x| p.eval(x).is_negative())
}

/// The checks that need no surface: tiling of `[0, τ]`, basis references,
/// `P + N = −K − uS` and the sign of `N`.
pub fn validate_chambers(ray: &ThreefoldRay) -> ValidationReport {
    let mut report = ValidationReport::default();

    // Tiling of [0, τ].
    if ray.chambers.is_empty() {
        report.push(ViolationKind::Tiling, None, "no chambers".into());
        return report;
    }
    if !ray.chambers[0].u_lo.is_zero() {
        report.push(
            ViolationKind::Tiling,
            Some(0),
            format!("first chamber starts at {}", format_rational(&ray.chambers[0].u_lo)),
        );
    }
    let last = ray.chambers.last().unwrap();
    if last.u_hi != ray.tau {
        report.push(
            ViolationKind::Tiling,
            Some(ray.chambers.len() - 1),
            format!(
                "last chamber ends at {} but tau = {}",
                format_rational(&last.u_hi),
                format_rational(&ray.tau)
            ),
        );
    }
    for (i, c) in ray.chambers.iter().enumerate() {
        if c.u_lo >= c.u_hi {
            report.push(
                ViolationKind::Tiling,
                Some(i),
                format!("empty interval [{}, {}]", format_rational(&c.u_lo), format_rational(&c.u_hi)),
            );
        }
        if let Some(next) = ray.chambers.get(i + 1) {
            if c.u_hi != next.u_lo {
                report.push(
                    ViolationKind::Tiling,
                    Some(i),
                    format!(
                        "ends at {} but next starts at {}",
                        format_rational(&c.u_hi),
                        format_rational(&next.u_lo)
                    ),
                );
            }
        }
    }

    for name in ray.minus_k.names().chain(ray.ray_divisor.names()) {
        if !ray.basis.iter().any(|b| b == name) {
            report.push(ViolationKind::Reference, None, format!("unknown basis name {name}"));
        }
    }
    let ray_class = ray.ray_class();
    for (i, ch) in ray.chambers.iter().enumerate() {
        let neg = match ray.negative_class(ch) {
            Ok(n) => n,
            Err(e) => {
                report.push(ViolationKind::Reference, Some(i), e.to_string());
                continue;
            }
        };
        let sum = ch.positive.add(&neg);
        if sum != ray_class {
            report.push(
                ViolationKind::Identity,
                Some(i),
                format!("P + N = {sum}, expected {ray_class}"),
            );
        }
        check_signs(&mut report, i, ch.u_lo.clone(), ch.u_hi.clone(), &ch.negative);
    }
    report
}

fn check_signs(
    report: &mut ValidationReport,
    i: usize,
    lo: Rational,
    hi: Rational,
    terms: &[(String, Polynomial)],
) {
    for (name, c) in terms {
        if let Some(x) = nonnegative(c, &lo, &hi) {
            report.push(
                ViolationKind::NegativeCoefficient,
                Some(i),
                format!("coefficient {} of {name} is negative at u = {}", c, format_rational(&x)),
            );
        }
        if c.degree().unwrap_or(0) > 2 {
            report.warnings.push(format!(
                "chamber {i}: coefficient of {name} has degree > 2, sign checked at endpoints only"
            ));
        }
    }
}

/// [`validate_chambers`] plus restriction consistency, `(P|_S)² = P²·S`, and
/// nefness against the surface curves and the supplied 3-fold curves.
pub fn validate_ray(
    ray: &ThreefoldRay,
    geom: &SurfaceGeometry,
    pairing: Option<&CurvePairing>,
) -> ValidationReport {
    let mut report = validate_chambers(ray);
    report.warnings.splice(0..0, geom.adjunction_warnings());
    if ray.chambers.is_empty() {
        return report;
    }
    if ray.restriction.to != geom.basis() {
        report.push(
            ViolationKind::Reference,
            None,
            "restriction target basis differs from the surface basis".into(),
        );
        return report;
    }

    let s = &ray.ray_divisor;
    for (i, ch) in ray.chambers.iter().enumerate() {
        let (lo, hi) = (&ch.u_lo, &ch.u_hi);
        let Ok(neg) = ray.negative_class(ch) else { continue };
        check_signs(&mut report, i, lo.clone(), hi.clone(), &ch.restricted_negative);

        // Restriction consistency.
        let restricted_n = match ray.restriction.apply(&neg) {
            Ok(r) => r,
            Err(e) => {
                report.push(ViolationKind::Reference, Some(i), e.to_string());
                continue;
            }
        };
        let mut declared = DivisorClass::zero();
        let mut missing = false;
        for (name, c) in &ch.restricted_negative {
            match geom.curve(name) {
                Some(curve) => declared = declared.add(&curve.class.mul_poly(c)),
                None => {
                    report.push(ViolationKind::Reference, Some(i), format!("unknown curve {name}"));
                    missing = true;
                }
            }
        }
        if !missing && declared != restricted_n {
            report.push(
                ViolationKind::Restriction,
                Some(i),
                format!("restricted negative part {declared} but N|_S = {restricted_n}"),
            );
        }

        let p_s = match ray.restriction.apply(&ch.positive) {
            Ok(p) => p,
            Err(e) => {
                report.push(ViolationKind::Reference, Some(i), e.to_string());
                continue;
            }
        };
        match (geom.intersect(&p_s, &p_s), ray.triple.eval(&ch.positive, &ch.positive, s)) {
            (Ok(a), Ok(b)) if a != b => report.push(
                ViolationKind::Restriction,
                Some(i),
                format!("(P|_S)^2 = {a} but P^2.S = {b}"),
            ),
            (Err(e), _) | (_, Err(e)) => {
                report.push(ViolationKind::Reference, Some(i), e.to_string())
            }
            _ => {}
        }

        let mid = (lo + hi) / rat(2, 1);
        let probes = [lo.clone(), mid, hi.clone()];
        for curve in geom.curves() {
            let Ok(d) = geom.intersect(&p_s, &curve.class) else { continue };
            if let Some(x) = probes.iter().find(|x| d.eval(x).is_negative()) {
                report.push(
                    ViolationKind::NotNef,
                    Some(i),
                    format!("P|_S . {} < 0 at u = {}", curve.name, format_rational(x)),
                );
            }
        }
        if let Some(pairing) = pairing {
            for curve in &pairing.curves {
                let d = curve.dot(&ch.positive);
                if let Some(x) = probes.iter().find(|x| d.eval(x).is_negative()) {
                    report.push(
                        ViolationKind::NotNef,
                        Some(i),
                        format!("P . {} < 0 at u = {}", curve.name, format_rational(x)),
                    );
                }
            }
        }
    }
    report
}
