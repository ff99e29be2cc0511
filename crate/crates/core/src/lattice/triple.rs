use std::collections::BTreeMap;

use num_traits::Zero;

use super::{DivisorClass, LatticeError};
use crate::ratfn::{Polynomial, Rational};

/// Symmetric trilinear form keyed by sorted name triples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleForm {
    basis: Vec<String>,
    entries: BTreeMap<[String; 3], Rational>,
}

fn key(a: &str, b: &str, c: &str) -> [String; 3] {
    let mut k = [a.to_string(), b.to_string(), c.to_string()];
    k.sort();
    k
}

impl TripleForm {
    pub fn new(basis: Vec<String>) -> Self {
        Self { basis, entries: BTreeMap::new() }
    }

    /// Sets the value on the unordered triple `{a, b, c}`. Conflicting
    /// duplicates are rejected.
    pub fn set(&mut self, a: &str, b: &str, c: &str, value: Rational) -> Result<(), LatticeError> {
        for n in [a, b, c] {
            if !self.basis.iter().any(|x| x == n) {
                return Err(LatticeError::UnknownBasisName(n.to_string()));
            }
        }
        let k = key(a, b, c);
        if let Some(old) = self.entries.get(&k) {
            if old != &value {
                return Err(LatticeError::DuplicateName(k.join(".")));
            }
        }
        if !value.is_zero() {
            self.entries.insert(k, value);
        }
        Ok(())
    }

    pub fn get(&self, a: &str, b: &str, c: &str) -> Rational {
        self.entries.get(&key(a, b, c)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[String; 3], &Rational)> {
        self.entries.iter()
    }

    pub fn check_names(&self, class: &DivisorClass) -> Result<(), LatticeError> {
        match class.names().find(|n| !self.basis.iter().any(|b| b == n)) {
            Some(n) => Err(LatticeError::UnknownBasisName(n.to_string())),
            None => Ok(()),
        }
    }

    pub fn eval(
        &self,
        a: &DivisorClass,
        b: &DivisorClass,
        c: &DivisorClass,
    ) -> Result<Polynomial, LatticeError> {
        self.check_names(a)?;
        self.check_names(b)?;
        self.check_names(c)?;
        let mut acc = Polynomial::zero();
        for (na, pa) in a.iter() {
            for (nb, pb) in b.iter() {
                let ab = pa * pb;
                for (nc, pc) in c.iter() {
                    let t = self.get(na, nb, nc);
                    if !t.is_zero() {
                        acc = &acc + &(&ab * pc).scale(&t);
                    }
                }
            }
        }
        Ok(acc)
    }
}

/// Trilinear form value `a·b·c`.
pub fn triple_eval(
    t: &TripleForm,
    a: &DivisorClass,
    b: &DivisorClass,
    c: &DivisorClass,
) -> Result<Polynomial, LatticeError> {
    t.eval(a, b, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfn::int;

    fn form_2_16() -> TripleForm {
        let mut t = TripleForm::new(vec!["H".into(), "E".into()]);
        t.set("H", "H", "H", int(4)).unwrap();
        t.set("H", "H", "E", int(0)).unwrap();
        t.set("E", "E", "H", int(-2)).unwrap();
        t.set("E", "E", "E", int(-2)).unwrap();
        t
    }

    #[test]
    fn cube_along_exceptional_ray() {
        let t = form_2_16();
        let d = DivisorClass::from_polys([
            ("H", Polynomial::constant(int(2))),
            ("E", Polynomial::linear(int(-1), int(-1))),
        ]);
        let cube = triple_eval(&t, &d, &d, &d).unwrap();
        let want = Polynomial::from_coeffs(vec![int(22), int(-18), int(-6), int(2)]);
        assert_eq!(cube, want);
    }

    #[test]
    fn symmetric_keys() {
        let t = form_2_16();
        assert_eq!(t.get("E", "H", "E"), int(-2));
        assert_eq!(t.get("H", "E", "E"), int(-2));
    }

    #[test]
    fn zero_argument() {
        let t = form_2_16();
        let h = DivisorClass::basis("H");
        assert!(triple_eval(&t, &DivisorClass::zero(), &h, &h).unwrap().is_zero());
    }

    #[test]
    fn conflicting_duplicate_rejected() {
        let mut t = form_2_16();
        assert!(t.set("E", "H", "E", int(5)).is_err());
        assert!(t.set("E", "H", "X", int(5)).is_err());
    }
}
