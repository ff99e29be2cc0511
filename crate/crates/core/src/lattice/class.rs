use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::ratfn::{format_rational, Polynomial, Rational};

/// Coefficient map from basis name to a polynomial in the ray parameter.
/// Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DivisorClass {
    coeffs: BTreeMap<String, Polynomial>,
}

impl DivisorClass {
    pub fn zero() -> Self {
        Self::default()
    }

    /// A single basis element with coefficient 1.
    pub fn basis(name: &str) -> Self {
        Self::zero().with(name, Polynomial::one())
    }

    pub fn from_constants<'a>(pairs: impl IntoIterator<Item = (&'a str, Rational)>) -> Self {
        let mut out = Self::zero();
        for (name, c) in pairs {
            out.add_term(name, &Polynomial::constant(c));
        }
        out
    }

    pub fn from_polys<'a>(pairs: impl IntoIterator<Item = (&'a str, Polynomial)>) -> Self {
        let mut out = Self::zero();
        for (name, p) in pairs {
            out.add_term(name, &p);
        }
        out
    }

    pub fn with(mut self, name: &str, coeff: Polynomial) -> Self {
        self.add_term(name, &coeff);
        self
    }

    pub fn add_term(&mut self, name: &str, coeff: &Polynomial) {
        let entry = self.coeffs.entry(name.to_string()).or_default();
        *entry = &*entry + coeff;
        if entry.is_zero() {
            self.coeffs.remove(name);
        }
    }

    pub fn coeff(&self, name: &str) -> Polynomial {
        self.coeffs.get(name).cloned().unwrap_or_default()
    }

    /// Constant term of the named coefficient.
    pub fn coeff_at(&self, name: &str, u: &Rational) -> Rational {
        self.coeffs.get(name).map_or_else(Rational::zero, |p| p.eval(u))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Polynomial)> {
        self.coeffs.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.coeffs.keys().map(String::as_str)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.values().all(Polynomial::is_constant)
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.values().filter_map(Polynomial::degree).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (name, c) in &other.coeffs {
            out.add_term(name, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        self.mul_poly(&Polynomial::constant(s.clone()))
    }

    pub fn mul_poly(&self, p: &Polynomial) -> Self {
        let mut out = Self::zero();
        for (name, c) in &self.coeffs {
            out.add_term(name, &(c * p));
        }
        out
    }

    /// Specialises every coefficient at `u`.
    pub fn eval(&self, u: &Rational) -> Self {
        Self::from_constants(self.coeffs.iter().map(|(k, p)| (k.as_str(), p.eval(u))))
    }

    /// Renders as e.g. `2H - (1+u)E` style text, variable `var`.
    pub fn display_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (name, p) in &self.coeffs {
            let text = match p.degree() {
                Some(0) => {
                    let c = p.coeff(0);
                    if c.is_one() {
                        name.clone()
                    } else if c == -Rational::one() {
                        format!("-{name}")
                    } else if c.is_negative() || c.is_integer() {
                        format!("{}{name}", format_rational(&c))
                    } else {
                        format!("({}){name}", format_rational(&c))
                    }
                }
                _ => format!("({}){name}", p.display_in(var)),
            };
            parts.push(text);
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_in("u"))
    }
}
