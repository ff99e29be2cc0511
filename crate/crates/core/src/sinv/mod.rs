//! Expected vanishing orders along flags `X ⊃ S ⊃ C ∋ p`, their blowup
//! refinements, surface β and α bounds, and the δ-bound combinators.

mod bounds;
mod flag;
mod outer;
mod trace;

use std::collections::BTreeMap;

pub use bounds::{beta_curve, delta_bound, fiber_delta_bound, tau_alpha_upper, BoundPart, BoundVerdict, Verdict};
pub use flag::{blowup_surface, Blowup, FlagSurface, SurfaceChamber};
pub use trace::{Bivariate, InnerChamber, InnerPiece, Trace, TraceTerm};

use num_traits::One;
use outer::{Inner, Outer};

use crate::lattice::{validate_chambers, LatticeError, NamedCurve, SurfaceGeometry, ThreefoldRay};
use crate::ratfn::{int, PiecewisePolynomial, Polynomial, RatFnError, Rational, DEFAULT_DEGREE_BOUND};
use crate::zariski::ZariskiError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SinvError {
    #[error("invalid ray: {0}")]
    InvalidRay(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("no local multiplicity of {curve} at {point}")]
    MissingLocalMultiplicity { curve: String, point: String },
    #[error("missing part: {0}")]
    MissingPart(String),
    #[error("non-positive value: {0}")]
    NonPositive(String),
    #[error("{functional} does not apply to a {variant} flag")]
    WrongVariant { functional: String, variant: String },
    #[error("curve {0} has zero class")]
    ZeroClass(String),
    #[error(transparent)]
    Zariski(#[from] ZariskiError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    RatFn(#[from] RatFnError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlagVariant {
    Divisor,
    Curve {
        curve: String,
        log_discrepancy: Rational,
    },
    Point {
        point: String,
        curve: String,
        log_discrepancy: Rational,
    },
    /// Blowup at `point`. `exceptional_points` lists points on the
    /// exceptional curve with the multiplicities of strict transforms there.
    Blowup {
        point: String,
        multiplicities: BTreeMap<String, u32>,
        exceptional_points: BTreeMap<String, BTreeMap<String, u32>>,
        log_discrepancy: Rational,
    },
}

impl FlagVariant {
    pub fn kind(&self) -> &'static str {
        match self {
            FlagVariant::Divisor => "divisor",
            FlagVariant::Curve { .. } => "curve",
            FlagVariant::Point { .. } => "point",
            FlagVariant::Blowup { .. } => "blowup",
        }
    }

    pub fn log_discrepancy(&self) -> Rational {
        match self {
            FlagVariant::Divisor => Rational::one(),
            FlagVariant::Curve { log_discrepancy, .. }
            | FlagVariant::Point { log_discrepancy, .. }
            | FlagVariant::Blowup { log_discrepancy, .. } => log_discrepancy.clone(),
        }
    }
}

/// A ray, the surface it is restricted to, and the flag on that surface.
/// `N(u)|_S` is read from the ray's declared restricted negative parts.
#[derive(Clone, Debug)]
pub struct FlagSpec<'a> {
    pub ray: &'a ThreefoldRay,
    pub surface: &'a SurfaceGeometry,
    pub variant: FlagVariant,
    pub degree_bound: usize,
}

impl<'a> FlagSpec<'a> {
    pub fn new(ray: &'a ThreefoldRay, surface: &'a SurfaceGeometry, variant: FlagVariant) -> Self {
        Self { ray, surface, variant, degree_bound: DEFAULT_DEGREE_BOUND }
    }

    fn wrong(&self, functional: &str) -> SinvError {
        SinvError::WrongVariant { functional: functional.into(), variant: self.variant.kind().into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantResult {
    pub value: Rational,
    pub trace: Trace,
    pub verdict: Option<BoundVerdict>,
}

impl InvariantResult {
    fn from_terms(terms: Vec<TraceTerm>) -> Self {
        let trace = Trace { terms };
        Self { value: trace.reintegrate(), trace, verdict: None }
    }
}

fn chamberwise(
    fs: &FlagSurface,
    f: impl Fn(usize) -> Polynomial,
) -> Result<PiecewisePolynomial, SinvError> {
    let mut bps = vec![fs.lo().clone()];
    let mut segs = Vec::new();
    for (i, ch) in fs.chambers.iter().enumerate() {
        bps.push(ch.u_hi.clone());
        segs.push(f(i));
    }
    Ok(PiecewisePolynomial::new(bps, segs)?)
}

fn host<'g>(geom: &'g SurfaceGeometry, curve: &str) -> Result<&'g NamedCurve, SinvError> {
    geom.curve(curve).ok_or_else(|| LatticeError::UnknownCurve(curve.into()).into())
}

fn double_term(
    fs: &FlagSurface,
    host: &NamedCurve,
    inner: Inner<'_>,
    label: String,
    prefactor: Rational,
    degree_bound: usize,
) -> Result<TraceTerm, SinvError> {
    let (integrand, pieces) = Outer { fs, host, inner, degree_bound }.run()?;
    Ok(TraceTerm { label, prefactor, integrand, inner: pieces })
}

/// `3/K³·∫(P²·S)·ord_C(N(u)|_S) du` and `3/K³·∫∫ vol(P(u)|_S − vC) dv du`.
fn curve_terms(fs: &FlagSurface, curve: &str, degree_bound: usize) -> Result<Vec<TraceTerm>, SinvError> {
    let c = host(&fs.geom, curve)?;
    let pre = int(3) / &fs.minus_k_cubed;
    let ord = TraceTerm {
        label: format!("(P|_S)^2 ord_{curve} N|_S"),
        prefactor: pre.clone(),
        integrand: chamberwise(fs, |i| &fs.chambers[i].p2s * &fs.ord(i, curve))?,
        inner: Vec::new(),
    };
    let vol = double_term(fs, c, Inner::Volume, format!("vol(P|_S - v{curve})"), pre, degree_bound)?;
    Ok(vec![ord, vol])
}

fn point_ord_term(fs: &FlagSurface, curve: &str, point: &str, degree_bound: usize) -> Result<TraceTerm, SinvError> {
    let c = host(&fs.geom, curve)?;
    double_term(
        fs,
        c,
        Inner::PointOrd { point },
        format!("(P.{curve}) ord_{point}(N'|_{curve} + N|_{curve})"),
        int(6) / &fs.minus_k_cubed,
        degree_bound,
    )
}

fn point_square_term(fs: &FlagSurface, curve: &str, degree_bound: usize) -> Result<TraceTerm, SinvError> {
    let c = host(&fs.geom, curve)?;
    double_term(fs, c, Inner::PointSquare, format!("(P.{curve})^2"), int(3) / &fs.minus_k_cubed, degree_bound)
}

/// `S_X(S) = (1/K³)∫₀^τ P(u)³ du`.
pub fn s_divisor(ray: &ThreefoldRay) -> Result<InvariantResult, SinvError> {
    let report = validate_chambers(ray);
    if !report.is_ok() {
        return Err(SinvError::InvalidRay(report.to_string()));
    }
    let k3 = ray.minus_k_cubed()?;
    let mut bps = vec![ray.chambers[0].u_lo.clone()];
    let mut segs = Vec::new();
    for ch in &ray.chambers {
        bps.push(ch.u_hi.clone());
        segs.push(ray.triple.eval(&ch.positive, &ch.positive, &ch.positive)?);
    }
    Ok(InvariantResult::from_terms(vec![TraceTerm {
        label: "P^3".into(),
        prefactor: Rational::one() / k3,
        integrand: PiecewisePolynomial::new(bps, segs)?,
        inner: Vec::new(),
    }]))
}

/// `S(W^S; C)`.
pub fn s_curve(flag: &FlagSpec<'_>) -> Result<InvariantResult, SinvError> {
    let FlagVariant::Curve { curve, .. } = &flag.variant else { return Err(flag.wrong("s_curve")) };
    let fs = FlagSurface::new(flag.ray, flag.surface)?;
    Ok(InvariantResult::from_terms(curve_terms(&fs, curve, flag.degree_bound)?))
}

/// `F_p`.
pub fn f_point(flag: &FlagSpec<'_>) -> Result<InvariantResult, SinvError> {
    let FlagVariant::Point { point, curve, .. } = &flag.variant else { return Err(flag.wrong("f_point")) };
    let fs = FlagSurface::new(flag.ray, flag.surface)?;
    Ok(InvariantResult::from_terms(vec![point_ord_term(&fs, curve, point, flag.degree_bound)?]))
}

/// `S(W^{S,C}; p)`.
pub fn s_point(flag: &FlagSpec<'_>) -> Result<InvariantResult, SinvError> {
    let FlagVariant::Point { point, curve, .. } = &flag.variant else { return Err(flag.wrong("s_point")) };
    let fs = FlagSurface::new(flag.ray, flag.surface)?;
    Ok(InvariantResult::from_terms(vec![
        point_square_term(&fs, curve, flag.degree_bound)?,
        point_ord_term(&fs, curve, point, flag.degree_bound)?,
    ]))
}

fn blown_up(flag: &FlagSpec<'_>, functional: &str) -> Result<(FlagSurface, Blowup), SinvError> {
    let FlagVariant::Blowup { point, multiplicities, exceptional_points, .. } = &flag.variant else {
        return Err(flag.wrong(functional));
    };
    FlagSurface::new(flag.ray, flag.surface)?.blown_up(point, multiplicities, exceptional_points)
}

/// `S(W^S; E)` for the exceptional curve of the blowup at the flag's point.
pub fn s_blowup_divisor(flag: &FlagSpec<'_>) -> Result<InvariantResult, SinvError> {
    let (fs, b) = blown_up(flag, "s_blowup_divisor")?;
    Ok(InvariantResult::from_terms(curve_terms(&fs, &b.exceptional, flag.degree_bound)?))
}

/// `S(W^{S,E}; q)` for a point `q` on the exceptional curve.
pub fn s_blowup_point(flag: &FlagSpec<'_>, q: &str) -> Result<InvariantResult, SinvError> {
    let (fs, b) = blown_up(flag, "s_blowup_point")?;
    Ok(InvariantResult::from_terms(vec![
        point_square_term(&fs, &b.exceptional, flag.degree_bound)?,
        point_ord_term(&fs, &b.exceptional, q, flag.degree_bound)?,
    ]))
}

/// `(3/K³)∫(P²·S)·c(u) du` with `c` the coefficient of `ord_curve` in
/// `N(u)|_S`: the first term of `S(W^S; F)` under `ord_F(ord_curve) ≤ A(F)`,
/// per unit of `A(F)`.
pub fn ord_term_bound(flag: &FlagSpec<'_>, ord_curve: &str) -> Result<InvariantResult, SinvError> {
    let fs = FlagSurface::new(flag.ray, flag.surface)?;
    host(&fs.geom, ord_curve)?;
    Ok(InvariantResult::from_terms(vec![TraceTerm {
        label: format!("(P|_S)^2 ord {ord_curve}"),
        prefactor: int(3) / &fs.minus_k_cubed,
        integrand: chamberwise(&fs, |i| &fs.chambers[i].p2s * &fs.ord(i, ord_curve))?,
        inner: Vec::new(),
    }]))
}

/// `(3/K³)∫(P²·S)·g_i(u) du` where `g_i` bounds `(1/(P|_S)²)∫vol dv / A(F)`
/// on chamber `i`: the second term of `S(W^S; F)` per unit of `A(F)`.
pub fn volume_term_bound(flag: &FlagSpec<'_>, inverse_delta: &[Polynomial]) -> Result<InvariantResult, SinvError> {
    let fs = FlagSurface::new(flag.ray, flag.surface)?;
    if inverse_delta.len() != fs.chambers.len() {
        return Err(SinvError::MissingPart(format!(
            "{} chambers but {} inverse delta bounds",
            fs.chambers.len(),
            inverse_delta.len()
        )));
    }
    Ok(InvariantResult::from_terms(vec![TraceTerm {
        label: "(P|_S)^2 / delta".into(),
        prefactor: int(3) / &fs.minus_k_cubed,
        integrand: chamberwise(&fs, |i| &fs.chambers[i].p2s * &inverse_delta[i])?,
        inner: Vec::new(),
    }]))
}

/// Sum of [`ord_term_bound`] and [`volume_term_bound`].
pub fn s_surface_bound(
    flag: &FlagSpec<'_>,
    ord_curve: &str,
    inverse_delta: &[Polynomial],
) -> Result<InvariantResult, SinvError> {
    let mut terms = ord_term_bound(flag, ord_curve)?.trace.terms;
    terms.extend(volume_term_bound(flag, inverse_delta)?.trace.terms);
    Ok(InvariantResult::from_terms(terms))
}

/// `(−K_X)³`.
pub fn minus_k_cubed(ray: &ThreefoldRay) -> Result<Rational, SinvError> {
    Ok(ray.minus_k_cubed()?)
}
