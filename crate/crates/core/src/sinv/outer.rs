//! `∫ f(u) du` where `f(u) = ∫ g(u, v) dv` over a chamber walk in v.
//!
//! Candidate breakpoints come from the ray chambers, the u-roots of
//! `(P(u)|_S)·Q`, and crossings of the inner walls. The walls are found by
//! probing the walk and fitting lines through the labelled events. Between
//! breakpoints `f` is interpolated from exact samples and checked on extra
//! samples.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::flag::FlagSurface;
use super::trace::{Bivariate, InnerChamber, InnerPiece};
use super::SinvError;
use crate::lattice::NamedCurve;
use crate::ratfn::{format_rational, int, interpolate, linear_root, PiecewisePolynomial, Polynomial, RatFnError, Rational};
use crate::zariski::walk;

const PROBES: usize = 5;
const MAX_DEPTH: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Inner<'a> {
    /// `vol(P(u)|_S − vC)`.
    Volume,
    /// `(P(u, v)·C)²`.
    PointSquare,
    /// `(P(u, v)·C)·ord_p(N′(u)|_C + N(u, v)|_C)`.
    PointOrd { point: &'a str },
}

struct Sample {
    value: Rational,
    /// Per v-chamber: bounds and integrand in v.
    pieces: Vec<(Rational, Rational, Polynomial)>,
    walls: Vec<(String, Rational)>,
    layout: Vec<String>,
}

pub(crate) struct Outer<'a> {
    pub fs: &'a FlagSurface,
    pub host: &'a NamedCurve,
    pub inner: Inner<'a>,
    pub degree_bound: usize,
}

fn midpoint(a: &Rational, b: &Rational) -> Rational {
    (a + b) / int(2)
}

fn grid(x: &Rational, y: &Rational, n: usize) -> Vec<Rational> {
    let step = (y - x) / int((n + 1) as i64);
    (1..=n).map(|k| x + &step * int(k as i64)).collect()
}

impl<'a> Outer<'a> {
    fn chamber_index(&self, u: &Rational) -> usize {
        let chs = &self.fs.chambers;
        chs.iter().position(|c| &c.u_lo <= u && u < &c.u_hi).unwrap_or(chs.len() - 1)
    }

    fn multiplicity(&self, curve: &str) -> Result<Rational, SinvError> {
        let Inner::PointOrd { point } = self.inner else { return Ok(Rational::zero()) };
        if curve == self.host.name {
            return Ok(Rational::zero());
        }
        let geom = &self.fs.geom;
        let q = geom.curve(curve).ok_or_else(|| SinvError::Lattice(crate::lattice::LatticeError::UnknownCurve(curve.into())))?;
        if geom.intersect(&q.class, &self.host.class)?.is_zero() {
            return Ok(Rational::zero());
        }
        q.multiplicity_at(point)
            .map(|m| int(m.into()))
            .ok_or_else(|| SinvError::MissingLocalMultiplicity { curve: curve.into(), point: point.into() })
    }

    fn sample(&self, u: &Rational) -> Result<Sample, SinvError> {
        let i = self.chamber_index(u);
        let ch = &self.fs.chambers[i];
        let geom = &self.fs.geom;
        let d = ch.positive.eval(u);
        let w = walk(geom, &d, &self.host.class)?;

        let mut fixed = Rational::zero();
        if matches!(self.inner, Inner::PointOrd { .. }) {
            for (name, c) in &ch.negative {
                fixed += c.eval(u) * self.multiplicity(name)?;
            }
        }

        let mut s = Sample { value: Rational::zero(), pieces: Vec::new(), walls: Vec::new(), layout: Vec::new() };
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for vc in &w.chambers {
            let g = match self.inner {
                Inner::Volume => vc.volume.clone(),
                Inner::PointSquare => {
                    let pc = geom.intersect(&vc.positive, &self.host.class)?;
                    &pc * &pc
                }
                Inner::PointOrd { .. } => {
                    let pc = geom.intersect(&vc.positive, &self.host.class)?;
                    let mut ord = Polynomial::constant(fixed.clone());
                    for (name, a) in &vc.negative {
                        ord = &ord + &a.scale(&self.multiplicity(name)?);
                    }
                    &pc * &ord
                }
            };
            s.value += g.integrate(&vc.v_lo, &vc.v_hi);
            s.pieces.push((vc.v_lo.clone(), vc.v_hi.clone(), g));
            let mut labels = Vec::new();
            for e in &vc.ends {
                let base = e.label();
                let n = seen.entry(base.clone()).or_insert(0);
                *n += 1;
                let label = if *n == 1 { base } else { format!("{base}#{n}") };
                s.walls.push((label.clone(), vc.v_hi.clone()));
                labels.push(label);
            }
            s.layout.push(labels.join("+"));
        }
        Ok(s)
    }

    /// Breakpoints known before probing.
    fn base_breakpoints(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        for ch in &self.fs.chambers {
            out.push(ch.u_lo.clone());
            out.push(ch.u_hi.clone());
            for q in self.fs.geom.curves() {
                let Ok(p) = self.fs.geom.intersect(&ch.positive, &q.class) else { continue };
                if let Ok(Some(r)) = linear_root(&p) {
                    if r > ch.u_lo && r < ch.u_hi {
                        out.push(r);
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Interior breakpoints of `(x, y)` from crossings of fitted wall lines.
    fn refine(&self, x: &Rational, y: &Rational, depth: usize) -> Result<Vec<Rational>, SinvError> {
        let us = grid(x, y, PROBES);
        let mut points: BTreeMap<String, Vec<(Rational, Rational)>> = BTreeMap::new();
        for u in &us {
            for (label, v) in self.sample(u)?.walls {
                points.entry(label).or_default().push((u.clone(), v));
            }
        }
        let mut lines: Vec<(Rational, Rational)> = vec![(Rational::zero(), Rational::zero())];
        let mut complete = true;
        for pts in points.values() {
            if pts.len() < 2 {
                complete = false;
                continue;
            }
            let (u0, v0) = &pts[0];
            let (u1, v1) = &pts[1];
            let slope = (v1 - v0) / (u1 - u0);
            let icpt = v0 - &slope * u0;
            if pts[2..].iter().all(|(u, v)| &(&icpt + &slope * u) == v) {
                lines.push((icpt, slope));
            } else {
                complete = false;
            }
        }
        if !complete && depth < MAX_DEPTH {
            let m = midpoint(x, y);
            let mut out = self.refine(x, &m, depth + 1)?;
            out.push(m.clone());
            out.extend(self.refine(&m, y, depth + 1)?);
            return Ok(out);
        }
        let mut out = Vec::new();
        for (i, (a1, b1)) in lines.iter().enumerate() {
            for (a2, b2) in &lines[i + 1..] {
                if b1 == b2 {
                    continue;
                }
                let u = (a2 - a1) / (b1 - b2);
                if &u > x && &u < y {
                    out.push(u);
                }
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn fit(&self, x: &Rational, y: &Rational, bisect: bool) -> Result<Vec<(Rational, Rational, Polynomial, InnerPiece)>, SinvError> {
        let us = grid(x, y, self.degree_bound + 3);
        let samples = us.iter().map(|u| self.sample(u)).collect::<Result<Vec<_>, _>>()?;
        let values: Vec<(Rational, Rational)> =
            us.iter().cloned().zip(samples.iter().map(|s| s.value.clone())).collect();
        match interpolate(&values, self.degree_bound) {
            Ok(p) => {
                let piece = InnerPiece {
                    u_lo: x.clone(),
                    u_hi: y.clone(),
                    chambers: self.inner_layout(&us, &samples),
                };
                Ok(vec![(x.clone(), y.clone(), p, piece)])
            }
            Err(RatFnError::VerificationFailed { .. }) if bisect => {
                let m = midpoint(x, y);
                let mut out = self.fit(x, &m, false)?;
                out.extend(self.fit(&m, y, false)?);
                Ok(out)
            }
            Err(RatFnError::VerificationFailed { at, expected, got }) => Err(SinvError::VerificationFailed(format!(
                "on [{}, {}] at u = {at}: sampled {expected}, interpolant {got}",
                format_rational(x),
                format_rational(y)
            ))),
            Err(e) => Err(e.into()),
        }
    }

    /// Bivariate chamber data, when every sample has the same layout.
    fn inner_layout(&self, us: &[Rational], samples: &[Sample]) -> Option<Vec<InnerChamber>> {
        let first = &samples[0];
        if samples.iter().any(|s| s.layout != first.layout) {
            return None;
        }
        let fit = |f: &dyn Fn(&Sample) -> Rational| -> Option<Polynomial> {
            let pts: Vec<(Rational, Rational)> = us.iter().cloned().zip(samples.iter().map(f)).collect();
            interpolate(&pts, self.degree_bound).ok()
        };
        let mut out = Vec::new();
        for j in 0..first.pieces.len() {
            let v_lo = fit(&|s| s.pieces[j].0.clone())?;
            let v_hi = fit(&|s| s.pieces[j].1.clone())?;
            let deg = samples.iter().filter_map(|s| s.pieces[j].2.degree()).max().unwrap_or(0);
            let coeffs = (0..=deg).map(|k| fit(&|s| s.pieces[j].2.coeff(k))).collect::<Option<Vec<_>>>()?;
            out.push(InnerChamber { v_lo, v_hi, integrand: Bivariate::new(coeffs) });
        }
        Some(out)
    }

    /// The outer integrand with its inner chamber structure.
    pub fn run(&self) -> Result<(PiecewisePolynomial, Vec<InnerPiece>), SinvError> {
        let base = self.base_breakpoints();
        let mut cuts = Vec::new();
        for w in base.windows(2) {
            cuts.push(w[0].clone());
            cuts.extend(self.refine(&w[0], &w[1], 0)?);
        }
        cuts.push(base[base.len() - 1].clone());
        cuts.sort();
        cuts.dedup();

        let mut bps = vec![cuts[0].clone()];
        let mut segs = Vec::new();
        let mut inner = Vec::new();
        for w in cuts.windows(2) {
            for (_, hi, p, piece) in self.fit(&w[0], &w[1], true)? {
                bps.push(hi);
                segs.push(p);
                inner.push(piece);
            }
        }
        Ok((PiecewisePolynomial::new(bps, segs)?, inner))
    }
}
