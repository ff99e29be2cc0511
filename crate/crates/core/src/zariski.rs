//! Zariski decomposition, volume and thresholds on a surface with a declared
//! list of negative curves.
//!
//! Everything runs on affine families `D(v) = A + v·B` so that a single
//! support iteration serves both the static decomposition (`B = 0`) and the
//! chamber walk along `D − v·C`, where signs are read just to the right of
//! the current `v`.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};

use crate::lattice::{DivisorClass, LatticeError, SurfaceGeometry};
use crate::ratfn::{format_rational, rational_sqrt, Polynomial, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ZariskiError {
    #[error("not pseudoeffective: {0}")]
    NotPseudoeffective(String),
    #[error("threshold is unbounded: no wall ahead of v = {0}")]
    Unbounded(String),
    #[error("not nef: {0}")]
    NotNef(String),
    #[error("volume vanishes at an irrational parameter after v = {0}")]
    IrrationalWall(String),
    #[error("chamber walk exceeded {0} steps")]
    WalkLimit(usize),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// `D = P + Σ coeff·curve`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub positive: DivisorClass,
    /// Support curves in declaration order, coefficients > 0.
    pub negative: Vec<(String, Rational)>,
}

/// Why a v-chamber ends.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WallEvent {
    Enter(String),
    Leave(String),
    Threshold,
}

impl WallEvent {
    pub fn label(&self) -> String {
        match self {
            Self::Enter(c) => format!("enter:{c}"),
            Self::Leave(c) => format!("leave:{c}"),
            Self::Threshold => "threshold".into(),
        }
    }
}

/// One chamber `[v_lo, v_hi]` of the walk; polynomials are in `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VChamber {
    pub v_lo: Rational,
    pub v_hi: Rational,
    pub positive: DivisorClass,
    pub negative: Vec<(String, Polynomial)>,
    pub volume: Polynomial,
    pub ends: Vec<WallEvent>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Walk {
    pub chambers: Vec<VChamber>,
    pub threshold: Rational,
}

impl Walk {
    pub fn integrate_volume(&self) -> Rational {
        self.chambers.iter().map(|c| c.volume.integrate(&c.v_lo, &c.v_hi)).sum()
    }
}

const WALK_LIMIT: usize = 10_000;

/// `c + s·v`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Aff {
    c: Rational,
    s: Rational,
}

impl Aff {
    fn at(&self, v: &Rational) -> Rational {
        &self.c + &self.s * v
    }

    /// Sign just to the right of `v0`.
    fn sign_right(&self, v0: &Rational) -> Ordering {
        match self.at(v0).cmp(&Rational::zero()) {
            Ordering::Equal => self.s.cmp(&Rational::zero()),
            o => o,
        }
    }

    /// Root when the value decreases through zero after `v0`.
    fn falling_root(&self) -> Option<Rational> {
        self.s.is_negative().then(|| -&self.c / &self.s)
    }

    fn poly(&self) -> Polynomial {
        Polynomial::linear(self.c.clone(), self.s.clone())
    }
}

fn poly_sign_right(p: &Polynomial, v0: &Rational) -> Ordering {
    let mut q = p.clone();
    while !q.is_zero() {
        match q.eval(v0).cmp(&Rational::zero()) {
            Ordering::Equal => q = q.derivative(),
            o => return o,
        }
    }
    Ordering::Equal
}

/// All leading pivots negative, by symmetric elimination.
pub(crate) fn is_negative_definite(m: &[Vec<Rational>]) -> bool {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    for k in 0..n {
        if !a[k][k].is_negative() {
            return false;
        }
        for i in k + 1..n {
            let f = &a[i][k] / &a[k][k];
            if f.is_zero() {
                continue;
            }
            for j in k..n {
                let t = &f * &a[k][j];
                a[i][j] -= t;
            }
        }
    }
    true
}

/// Solves `m x = b` for each right-hand side column; `m` must be invertible.
fn solve(m: &[Vec<Rational>], rhs: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = m.len();
    let k = rhs.len();
    let mut a: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row = m[i].clone();
            row.extend(rhs.iter().map(|col| col[i].clone()));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).expect("invertible matrix");
        a.swap(col, piv);
        let inv = Rational::one() / &a[col][col];
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..n + k {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                }
            }
        }
    }
    (0..k).map(|j| (0..n).map(|i| a[i][n + j].clone()).collect()).collect()
}

/// Precomputed dense data for one surface and one affine family.
struct Family<'g> {
    geom: &'g SurfaceGeometry,
    curves: &'g [Vec<Rational>],
    curve_gram: &'g [Vec<Rational>],
    a: Vec<Rational>,
    b: Vec<Rational>,
    /// `D(v)·Q` per curve.
    d_dot: Vec<Aff>,
}

struct LocalDecomp {
    support: Vec<usize>,
    coeffs: Vec<Aff>,
    p_c: Vec<Rational>,
    p_s: Vec<Rational>,
}

impl<'g> Family<'g> {
    fn new(geom: &'g SurfaceGeometry, a: &DivisorClass, b: &DivisorClass) -> Result<Self, ZariskiError> {
        let av = geom.to_vector(a)?;
        let bv = geom.to_vector(b)?;
        let curves = geom.curve_vectors();
        let curve_gram = geom.curve_gram();
        let d_dot = curves
            .iter()
            .map(|q| Aff { c: geom.pair_vectors(&av, q), s: geom.pair_vectors(&bv, q) })
            .collect();
        Ok(Self { geom, curves, curve_gram, a: av, b: bv, d_dot })
    }

    fn name(&self, i: usize) -> &str {
        &self.geom.curves()[i].name
    }

    /// Support iteration with signs read at `v0⁺`.
    fn decompose_right(&self, v0: &Rational) -> Result<LocalDecomp, String> {
        let mut support: Vec<usize> = Vec::new();
        let mut coeffs: Vec<Aff> = Vec::new();
        loop {
            // P·Q = D·Q − Σ a_i N_i·Q
            let dots: Vec<Aff> = (0..self.curves.len())
                .map(|q| {
                    let mut c = self.d_dot[q].c.clone();
                    let mut s = self.d_dot[q].s.clone();
                    for (k, &i) in support.iter().enumerate() {
                        let g = &self.curve_gram[i][q];
                        c -= &coeffs[k].c * g;
                        s -= &coeffs[k].s * g;
                    }
                    Aff { c, s }
                })
                .collect();
            let new: Vec<usize> = (0..self.curves.len())
                .filter(|q| !support.contains(q) && dots[*q].sign_right(v0) == Ordering::Less)
                .collect();
            if new.is_empty() {
                break;
            }
            support.extend(new);
            support.sort_unstable();
            let g: Vec<Vec<Rational>> = support
                .iter()
                .map(|&i| support.iter().map(|&j| self.curve_gram[i][j].clone()).collect())
                .collect();
            if !is_negative_definite(&g) {
                let names: Vec<&str> = support.iter().map(|&i| self.name(i)).collect();
                return Err(format!("support {{{}}} is not negative definite", names.join(", ")));
            }
            let rhs_c: Vec<Rational> = support.iter().map(|&i| self.d_dot[i].c.clone()).collect();
            let rhs_s: Vec<Rational> = support.iter().map(|&i| self.d_dot[i].s.clone()).collect();
            let sol = solve(&g, &[rhs_c, rhs_s]);
            coeffs = (0..support.len())
                .map(|k| Aff { c: sol[0][k].clone(), s: sol[1][k].clone() })
                .collect();
        }
        for (k, &i) in support.iter().enumerate() {
            if coeffs[k].sign_right(v0) != Ordering::Greater {
                return Err(format!("coefficient of {} is not positive", self.name(i)));
            }
        }
        let mut p_c = self.a.clone();
        let mut p_s = self.b.clone();
        for (k, &i) in support.iter().enumerate() {
            for (j, x) in self.curves[i].iter().enumerate() {
                if !x.is_zero() {
                    p_c[j] -= &coeffs[k].c * x;
                    p_s[j] -= &coeffs[k].s * x;
                }
            }
        }
        let d = LocalDecomp { support, coeffs, p_c, p_s };
        if poly_sign_right(&self.volume(&d), v0) == Ordering::Less {
            return Err("positive part has negative self-intersection".into());
        }
        Ok(d)
    }

    fn volume(&self, d: &LocalDecomp) -> Polynomial {
        let g = self.geom;
        Polynomial::from_coeffs(vec![
            g.pair_vectors(&d.p_c, &d.p_c),
            g.pair_vectors(&d.p_c, &d.p_s) * Rational::from_integer(2.into()),
            g.pair_vectors(&d.p_s, &d.p_s),
        ])
    }

    fn positive_class(&self, d: &LocalDecomp) -> DivisorClass {
        let mut out = DivisorClass::zero();
        for (j, name) in self.geom.basis().iter().enumerate() {
            out.add_term(name, &Polynomial::linear(d.p_c[j].clone(), d.p_s[j].clone()));
        }
        out
    }

    fn negative_terms(&self, d: &LocalDecomp) -> Vec<(String, Polynomial)> {
        d.support
            .iter()
            .zip(&d.coeffs)
            .map(|(&i, a)| (self.name(i).to_string(), a.poly()))
            .collect()
    }
}

/// Zariski decomposition of a constant class.
pub fn decompose(geom: &SurfaceGeometry, d: &DivisorClass) -> Result<Decomposition, ZariskiError> {
    let fam = Family::new(geom, d, &DivisorClass::zero())?;
    let zero = Rational::zero();
    let local = fam.decompose_right(&zero).map_err(ZariskiError::NotPseudoeffective)?;
    Ok(Decomposition {
        positive: fam.positive_class(&local).eval(&zero),
        negative: local
            .support
            .iter()
            .zip(&local.coeffs)
            .map(|(&i, a)| (fam.name(i).to_string(), a.c.clone()))
            .collect(),
    })
}

/// `P²`, or 0 when `d` is not pseudoeffective.
pub fn volume(geom: &SurfaceGeometry, d: &DivisorClass) -> Result<Rational, ZariskiError> {
    match decompose(geom, d) {
        Ok(dec) => Ok(geom.intersect_const(&dec.positive, &dec.positive)),
        Err(ZariskiError::NotPseudoeffective(_)) => Ok(Rational::zero()),
        Err(e) => Err(e),
    }
}

/// Smallest zero of `q` in `(v0, cap]` with `q(v0⁺) > 0`. Irrational zeros
/// inside the window are an error; zeros past `cap` are ignored.
fn first_zero(q: &Polynomial, v0: &Rational, cap: Option<&Rational>) -> Result<Option<Rational>, ZariskiError> {
    let in_window = |r: &Rational| r > v0 && cap.is_none_or(|c| r <= c);
    match q.degree() {
        None | Some(0) => Ok(None),
        Some(1) => {
            let r = -q.coeff(0) / q.coeff(1);
            Ok(in_window(&r).then_some(r))
        }
        _ => {
            let (a, b, c) = (q.coeff(2), q.coeff(1), q.coeff(0));
            let disc = &b * &b - Rational::from_integer(4.into()) * &a * &c;
            if disc.is_negative() {
                return Ok(None);
            }
            let two_a = &a * Rational::from_integer(2.into());
            if let Some(sq) = rational_sqrt(&disc) {
                let mut roots = [(-&b - &sq) / &two_a, (-&b + &sq) / &two_a];
                roots.sort();
                return Ok(roots.into_iter().find(|r| in_window(r)));
            }
            // Irrational pair: decide whether one lies in the window.
            let hit = match cap {
                Some(cap) => {
                    let vertex = -&b / &two_a;
                    !q.eval(cap).is_positive()
                        || (a.is_positive() && &vertex > v0 && &vertex < cap && q.eval(&vertex).is_negative())
                }
                None => a.is_negative() || (-&b / &two_a) > *v0,
            };
            if hit {
                Err(ZariskiError::IrrationalWall(format_rational(v0)))
            } else {
                Ok(None)
            }
        }
    }
}

/// Chamber walk along `d − v·c` for `v ≥ 0` up to the pseudoeffective threshold.
pub fn walk(geom: &SurfaceGeometry, d: &DivisorClass, c: &DivisorClass) -> Result<Walk, ZariskiError> {
    if d.is_zero() {
        geom.check_names(c)?;
        return Ok(Walk { chambers: Vec::new(), threshold: Rational::zero() });
    }
    let fam = Family::new(geom, d, &DivisorClass::zero().sub(c))?;
    {
        let fixed = Family::new(geom, d, &DivisorClass::zero())?;
        fixed.decompose_right(&Rational::zero()).map_err(ZariskiError::NotPseudoeffective)?;
    }
    let mut chambers = Vec::new();
    let mut v0 = Rational::zero();
    for _ in 0..WALK_LIMIT {
        let local = match fam.decompose_right(&v0) {
            Ok(l) => l,
            Err(_) => return Ok(Walk { chambers, threshold: v0 }),
        };
        let mut events: Vec<(Rational, WallEvent)> = Vec::new();
        for q in 0..fam.curves.len() {
            if let Some(k) = local.support.iter().position(|&i| i == q) {
                if let Some(r) = local.coeffs[k].falling_root() {
                    if r > v0 {
                        events.push((r, WallEvent::Leave(fam.name(q).into())));
                    }
                }
                continue;
            }
            let mut dot = fam.d_dot[q].clone();
            for (k, &i) in local.support.iter().enumerate() {
                let g = &fam.curve_gram[i][q];
                dot.c -= &local.coeffs[k].c * g;
                dot.s -= &local.coeffs[k].s * g;
            }
            if let Some(r) = dot.falling_root() {
                if r > v0 {
                    events.push((r, WallEvent::Enter(fam.name(q).into())));
                }
            }
        }
        let vol = fam.volume(&local);
        let cap = events.iter().map(|(r, _)| r).min().cloned();
        if poly_sign_right(&vol, &v0) == Ordering::Greater {
            if let Some(r) = first_zero(&vol, &v0, cap.as_ref())? {
                events.push((r, WallEvent::Threshold));
            }
        }
        let Some(v1) = events.iter().map(|(r, _)| r).min().cloned() else {
            return Err(ZariskiError::Unbounded(format_rational(&v0)));
        };
        let mut ends: Vec<WallEvent> =
            events.into_iter().filter(|(r, _)| r == &v1).map(|(_, e)| e).collect();
        ends.sort();
        let done = ends.contains(&WallEvent::Threshold);
        chambers.push(VChamber {
            v_lo: v0.clone(),
            v_hi: v1.clone(),
            positive: fam.positive_class(&local),
            negative: fam.negative_terms(&local),
            volume: vol,
            ends,
        });
        if done {
            return Ok(Walk { chambers, threshold: v1 });
        }
        v0 = v1;
    }
    Err(ZariskiError::WalkLimit(WALK_LIMIT))
}

/// `sup{v ≥ 0 : d − v·c pseudoeffective}`.
pub fn pseff_threshold(geom: &SurfaceGeometry, d: &DivisorClass, c: &DivisorClass) -> Result<Rational, ZariskiError> {
    Ok(walk(geom, d, c)?.threshold)
}

/// `sup{v : (d − v·c)·Q ≥ 0 for every declared Q}`; `d` must be nef.
pub fn nef_threshold(geom: &SurfaceGeometry, d: &DivisorClass, c: &DivisorClass) -> Result<Rational, ZariskiError> {
    let dv = geom.to_vector(d)?;
    let cv = geom.to_vector(c)?;
    let mut best: Option<Rational> = None;
    for curve in geom.curves() {
        let q = geom.to_vector(&curve.class)?;
        let dq = geom.pair_vectors(&dv, &q);
        if dq.is_negative() {
            return Err(ZariskiError::NotNef(format!("d.{} = {}", curve.name, format_rational(&dq))));
        }
        let cq = geom.pair_vectors(&cv, &q);
        if cq.is_positive() {
            let r = dq / cq;
            if best.as_ref().is_none_or(|b| &r < b) {
                best = Some(r);
            }
        }
    }
    best.ok_or_else(|| ZariskiError::Unbounded("0".into()))
}
