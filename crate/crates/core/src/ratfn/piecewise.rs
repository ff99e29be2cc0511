use num_traits::Zero;

use super::poly::Polynomial;
use super::rational::{format_rational, to_f64, Rational};
use super::RatFnError;

/// Piecewise polynomial on `[breakpoints[0], breakpoints[last]]`.
///
/// Segment `i` lives on `[breakpoints[i], breakpoints[i+1])`. The final
/// breakpoint belongs to the last segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewisePolynomial {
    breakpoints: Vec<Rational>,
    segments: Vec<Polynomial>,
}

impl PiecewisePolynomial {
    pub fn new(breakpoints: Vec<Rational>, segments: Vec<Polynomial>) -> Result<Self, RatFnError> {
        if breakpoints.len() < 2 || segments.len() + 1 != breakpoints.len() {
            return Err(RatFnError::Malformed(format!(
                "{} breakpoints for {} segments",
                breakpoints.len(),
                segments.len()
            )));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| w[0] >= w[1]) {
            return Err(RatFnError::Malformed(format!(
                "breakpoints not increasing at {} >= {}",
                format_rational(&w[0]),
                format_rational(&w[1])
            )));
        }
        Ok(Self { breakpoints, segments })
    }

    pub fn single(lo: Rational, hi: Rational, poly: Polynomial) -> Result<Self, RatFnError> {
        Self::new(vec![lo, hi], vec![poly])
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn segments(&self) -> &[Polynomial] {
        &self.segments
    }

    /// `(lo, hi, poly)` per segment.
    pub fn pieces(&self) -> impl Iterator<Item = (&Rational, &Rational, &Polynomial)> {
        self.breakpoints
            .windows(2)
            .zip(&self.segments)
            .map(|(w, p)| (&w[0], &w[1], p))
    }

    pub fn lo(&self) -> &Rational {
        &self.breakpoints[0]
    }

    pub fn hi(&self) -> &Rational {
        self.breakpoints.last().expect("at least two breakpoints")
    }

    fn check_domain(&self, x: &Rational) -> Result<(), RatFnError> {
        if x < self.lo() || x > self.hi() {
            return Err(RatFnError::OutOfDomain {
                at: format_rational(x),
                lo: format_rational(self.lo()),
                hi: format_rational(self.hi()),
            });
        }
        Ok(())
    }

    fn segment_index(&self, x: &Rational) -> usize {
        // Index of the last breakpoint ≤ x, clamped to the final segment.
        let idx = self.breakpoints.partition_point(|b| b <= x);
        idx.saturating_sub(1).min(self.segments.len() - 1)
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational, RatFnError> {
        self.check_domain(x)?;
        Ok(self.segments[self.segment_index(x)].eval(x))
    }

    /// Exact integral over `[a, b]`, split at interior breakpoints.
    pub fn integrate(&self, a: &Rational, b: &Rational) -> Result<Rational, RatFnError> {
        self.check_domain(a)?;
        self.check_domain(b)?;
        if a > b {
            return Err(RatFnError::Malformed(format!(
                "reversed bounds {} > {}",
                format_rational(a),
                format_rational(b)
            )));
        }
        let mut total = Rational::zero();
        for (lo, hi, p) in self.pieces() {
            let from = if lo > a { lo } else { a };
            let to = if hi < b { hi } else { b };
            if from < to {
                total += p.integrate(from, to);
            }
        }
        Ok(total)
    }

    pub fn integral(&self) -> Rational {
        self.pieces().map(|(lo, hi, p)| p.integrate(lo, hi)).sum()
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            segments: self.segments.iter().map(|p| p.scale(s)).collect(),
        }
    }

    /// Refines both operands to the union of breakpoints and combines
    /// segmentwise. Domains must coincide.
    pub fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&Polynomial, &Polynomial) -> Polynomial,
    ) -> Result<Self, RatFnError> {
        if self.lo() != other.lo() || self.hi() != other.hi() {
            return Err(RatFnError::Malformed("domains differ".into()));
        }
        let mut bps: Vec<Rational> =
            self.breakpoints.iter().chain(&other.breakpoints).cloned().collect();
        bps.sort();
        bps.dedup();
        let segments = bps
            .windows(2)
            .map(|w| f(&self.segments[self.segment_index(&w[0])], &other.segments[other.segment_index(&w[0])]))
            .collect();
        Self::new(bps, segments)
    }

    pub fn add(&self, other: &Self) -> Result<Self, RatFnError> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Merges neighbouring segments carrying the same polynomial.
    pub fn simplify(&self) -> Self {
        let mut bps = vec![self.breakpoints[0].clone()];
        let mut segs: Vec<Polynomial> = Vec::new();
        for (_, hi, p) in self.pieces() {
            if segs.last() == Some(p) {
                *bps.last_mut().unwrap() = hi.clone();
            } else {
                segs.push(p.clone());
                bps.push(hi.clone());
            }
        }
        Self { breakpoints: bps, segments: segs }
    }

    /// Composite Simpson rule with `panels` (rounded up to even) per segment.
    pub fn simpson(&self, panels: usize) -> f64 {
        let n = panels.max(2).next_multiple_of(2);
        self.pieces()
            .map(|(lo, hi, p)| simpson_f64(|x| p.eval_f64(x), to_f64(lo), to_f64(hi), n))
            .sum()
    }
}

/// Composite Simpson on `[a, b]` with an even panel count `n`.
pub fn simpson_f64(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}
