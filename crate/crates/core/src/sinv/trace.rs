use std::fmt;

use num_traits::{One, Zero};

use crate::ratfn::{format_rational, PiecewisePolynomial, Polynomial, Rational};

/// `Σ_k c_k(u)·v^k`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Bivariate {
    pub v_coeffs: Vec<Polynomial>,
}

impl Bivariate {
    pub fn new(mut v_coeffs: Vec<Polynomial>) -> Self {
        while v_coeffs.last().is_some_and(|c| c.is_zero()) {
            v_coeffs.pop();
        }
        Self { v_coeffs }
    }

    pub fn eval(&self, u: &Rational, v: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.v_coeffs.iter().rev() {
            acc = acc * v + c.eval(u);
        }
        acc
    }

    pub fn eval_f64(&self, u: f64, v: f64) -> f64 {
        self.v_coeffs.iter().rev().fold(0.0, |acc, c| acc * v + c.eval_f64(u))
    }

    /// The polynomial in v at a fixed u.
    pub fn at_u(&self, u: &Rational) -> Polynomial {
        Polynomial::from_coeffs(self.v_coeffs.iter().map(|c| c.eval(u)).collect())
    }

    /// `∫_{lo(u)}^{hi(u)} self dv` as a polynomial in u.
    pub fn integrate_v(&self, lo: &Polynomial, hi: &Polynomial) -> Polynomial {
        let mut acc = Polynomial::zero();
        for (k, c) in self.v_coeffs.iter().enumerate() {
            let n = (k + 1) as u32;
            let w = (&hi.pow(n) - &lo.pow(n)).scale(&(Rational::one() / Rational::from_integer(n.into())));
            acc = &acc + &(c * &w);
        }
        acc
    }
}

impl fmt::Display for Bivariate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Monomials by total degree, then by descending power of u.
        let mut terms: Vec<(usize, usize, Rational)> = Vec::new();
        for (k, c) in self.v_coeffs.iter().enumerate() {
            for (i, a) in c.coeffs().iter().enumerate() {
                if !a.is_zero() {
                    terms.push((i, k, a.clone()));
                }
            }
        }
        if terms.is_empty() {
            return write!(f, "0");
        }
        terms.sort_by(|a, b| (b.0 + b.1).cmp(&(a.0 + a.1)).then(b.0.cmp(&a.0)));
        for (n, (i, k, a)) in terms.iter().enumerate() {
            let neg = a < &Rational::zero();
            let mag = if neg { -a.clone() } else { a.clone() };
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mut mono = String::new();
            for (var, e) in [("u", *i), ("v", *k)] {
                match e {
                    0 => {}
                    1 => mono.push_str(var),
                    _ => mono.push_str(&format!("{var}^{e}")),
                }
            }
            if mono.is_empty() {
                write!(f, "{}", format_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else if mag.is_integer() {
                write!(f, "{}{mono}", format_rational(&mag))?;
            } else {
                write!(f, "({}){mono}", format_rational(&mag))?;
            }
        }
        Ok(())
    }
}

/// One v-chamber of a double integral over a u-interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InnerChamber {
    pub v_lo: Polynomial,
    pub v_hi: Polynomial,
    pub integrand: Bivariate,
}

/// Inner chamber structure on `[u_lo, u_hi]`. `chambers` is `None` when the
/// samples did not share one chamber layout; the outer integrand is still
/// verified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InnerPiece {
    pub u_lo: Rational,
    pub u_hi: Rational,
    pub chambers: Option<Vec<InnerChamber>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceTerm {
    pub label: String,
    pub prefactor: Rational,
    /// Outer integrand in u.
    pub integrand: PiecewisePolynomial,
    /// Empty for single integrals.
    pub inner: Vec<InnerPiece>,
}

impl TraceTerm {
    pub fn value(&self) -> Rational {
        &self.prefactor * self.integrand.integral()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Trace {
    pub terms: Vec<TraceTerm>,
}

impl Trace {
    /// `Σ prefactor·∫integrand`.
    pub fn reintegrate(&self) -> Rational {
        self.terms.iter().map(TraceTerm::value).sum()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            writeln!(f, "term {} × {}", t.label, format_rational(&t.prefactor))?;
            for (lo, hi, p) in t.integrand.pieces() {
                writeln!(f, "  u in [{}, {}]: {}", format_rational(lo), format_rational(hi), p)?;
            }
            for piece in &t.inner {
                let Some(chs) = &piece.chambers else {
                    writeln!(
                        f,
                        "  inner u in [{}, {}]: layout varies",
                        format_rational(&piece.u_lo),
                        format_rational(&piece.u_hi)
                    )?;
                    continue;
                };
                for ch in chs {
                    writeln!(
                        f,
                        "  inner u in [{}, {}], v in [{}, {}]: {}",
                        format_rational(&piece.u_lo),
                        format_rational(&piece.u_hi),
                        ch.v_lo,
                        ch.v_hi,
                        ch.integrand
                    )?;
                }
            }
        }
        Ok(())
    }
}
