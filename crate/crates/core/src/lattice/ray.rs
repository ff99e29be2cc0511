use std::collections::BTreeMap;

use num_traits::Zero;

use super::{DivisorClass, LatticeError, SurfaceGeometry, TripleForm};
use crate::ratfn::{Polynomial, Rational};

/// Linear map from 3-fold classes to surface classes, one row per 3-fold
/// basis element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Restriction {
    pub from: Vec<String>,
    pub to: Vec<String>,
    pub matrix: Vec<Vec<Rational>>,
}

impl Restriction {
    pub fn new(from: Vec<String>, to: Vec<String>, matrix: Vec<Vec<Rational>>) -> Result<Self, LatticeError> {
        if matrix.len() != from.len() || matrix.iter().any(|r| r.len() != to.len()) {
            return Err(LatticeError::Shape(format!(
                "restriction must be {}x{}",
                from.len(),
                to.len()
            )));
        }
        Ok(Self { from, to, matrix })
    }

    pub fn apply(&self, class: &DivisorClass) -> Result<DivisorClass, LatticeError> {
        let mut out = DivisorClass::zero();
        for (name, p) in class.iter() {
            let i = self
                .from
                .iter()
                .position(|b| b == name)
                .ok_or_else(|| LatticeError::UnknownBasisName(name.to_string()))?;
            for (j, m) in self.matrix[i].iter().enumerate() {
                if !m.is_zero() {
                    out.add_term(&self.to[j], &p.scale(m));
                }
            }
        }
        Ok(out)
    }
}

/// One interval of the ray with its Zariski data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RayChamber {
    pub u_lo: Rational,
    pub u_hi: Rational,
    pub positive: DivisorClass,
    /// 3-fold prime divisors (basis names or named divisors) with coefficients in u.
    pub negative: Vec<(String, Polynomial)>,
    /// `N(u)|_S` written as a combination of surface curves.
    pub restricted_negative: Vec<(String, Polynomial)>,
}

/// The ray `−K_X − uS`, `u ∈ [0, τ]`, with declared chamber data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreefoldRay {
    /// Display name of the ray divisor, e.g. `S` or `E`.
    pub name: String,
    pub basis: Vec<String>,
    pub triple: TripleForm,
    pub minus_k: DivisorClass,
    pub ray_divisor: DivisorClass,
    pub tau: Rational,
    /// Extra named divisors usable in chamber negative parts.
    pub divisors: BTreeMap<String, DivisorClass>,
    pub chambers: Vec<RayChamber>,
    pub restriction: Restriction,
}

impl ThreefoldRay {
    pub fn divisor(&self, name: &str) -> Option<DivisorClass> {
        if let Some(d) = self.divisors.get(name) {
            return Some(d.clone());
        }
        self.basis.iter().any(|b| b == name).then(|| DivisorClass::basis(name))
    }

    /// `Σ coeff·divisor` of a chamber's negative part.
    pub fn negative_class(&self, chamber: &RayChamber) -> Result<DivisorClass, LatticeError> {
        let mut out = DivisorClass::zero();
        for (name, c) in &chamber.negative {
            let d = self.divisor(name).ok_or_else(|| LatticeError::UnknownDivisor(name.clone()))?;
            out = out.add(&d.mul_poly(c));
        }
        Ok(out)
    }

    /// `−K_X − uS` with coefficients in u.
    pub fn ray_class(&self) -> DivisorClass {
        self.minus_k.sub(&self.ray_divisor.mul_poly(&Polynomial::x()))
    }

    pub fn minus_k_cubed(&self) -> Result<Rational, LatticeError> {
        Ok(self.triple.eval(&self.minus_k, &self.minus_k, &self.minus_k)?.coeff(0))
    }

    /// Chamber containing `u`, right-continuous except at τ.
    pub fn chamber_at(&self, u: &Rational) -> Option<&RayChamber> {
        let last = self.chambers.len().checked_sub(1)?;
        self.chambers
            .iter()
            .enumerate()
            .find(|(i, c)| &c.u_lo <= u && (u < &c.u_hi || (*i == last && u == &c.u_hi)))
            .map(|(_, c)| c)
    }
}

/// Named 3-fold curves with their intersection numbers against the basis.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CurvePairing {
    pub curves: Vec<PairedCurve>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairedCurve {
    pub name: String,
    pub pairing: BTreeMap<String, Rational>,
}

impl PairedCurve {
    pub fn dot(&self, class: &DivisorClass) -> Polynomial {
        let mut acc = Polynomial::zero();
        for (name, p) in class.iter() {
            if let Some(x) = self.pairing.get(name) {
                acc = &acc + &p.scale(x);
            }
        }
        acc
    }
}

/// Convenience: restrict a class and pair on the target surface.
pub fn restricted_square(
    restriction: &Restriction,
    geom: &SurfaceGeometry,
    class: &DivisorClass,
) -> Result<Polynomial, LatticeError> {
    let r = restriction.apply(class)?;
    geom.intersect(&r, &r)
}
