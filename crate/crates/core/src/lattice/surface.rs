use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_integer::Integer;
use num_traits::Zero;

use super::{DivisorClass, LatticeError};
use crate::ratfn::{format_rational, Polynomial, Rational};

/// A curve on a surface together with its multiplicities at named points.
///
/// `local_multiplicities == None` means the data was not supplied; any
/// computation needing it fails instead of assuming 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedCurve {
    pub name: String,
    pub class: DivisorClass,
    pub self_intersection: Rational,
    pub local_multiplicities: Option<BTreeMap<String, u32>>,
}

impl NamedCurve {
    /// Multiplicity at `point`, `None` when unknown.
    pub fn multiplicity_at(&self, point: &str) -> Option<u32> {
        self.local_multiplicities
            .as_ref()
            .map(|m| m.get(point).copied().unwrap_or(0))
    }
}

/// Basis, Gram matrix, canonical class and declared curves of a smooth surface.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceGeometry {
    basis: Vec<String>,
    index: HashMap<String, usize>,
    gram: Vec<Vec<Rational>>,
    canonical: DivisorClass,
    curves: Vec<NamedCurve>,
    points: Vec<String>,
    curve_vectors: Vec<Vec<Rational>>,
    curve_gram: Vec<Vec<Rational>>,
}

/// Input for a curve before its self-intersection is checked.
#[derive(Clone, Debug)]
pub struct CurveSpec {
    pub name: String,
    pub class: DivisorClass,
    pub self_intersection: Option<Rational>,
    pub local_multiplicities: Option<BTreeMap<String, u32>>,
}

impl SurfaceGeometry {
    pub fn new(
        basis: Vec<String>,
        gram: Vec<Vec<Rational>>,
        canonical: DivisorClass,
        curves: Vec<CurveSpec>,
        points: Vec<String>,
    ) -> Result<Self, LatticeError> {
        let n = basis.len();
        let mut index = HashMap::new();
        for (i, b) in basis.iter().enumerate() {
            if index.insert(b.clone(), i).is_some() {
                return Err(LatticeError::DuplicateName(b.clone()));
            }
        }
        if gram.len() != n || gram.iter().any(|row| row.len() != n) {
            return Err(LatticeError::Shape(format!("gram must be {n}x{n}")));
        }
        for i in 0..n {
            for j in i + 1..n {
                if gram[i][j] != gram[j][i] {
                    return Err(LatticeError::AsymmetricGram {
                        a: basis[i].clone(),
                        b: basis[j].clone(),
                    });
                }
            }
        }
        let mut geom = Self {
            basis,
            index,
            gram,
            canonical: DivisorClass::zero(),
            curves: Vec::new(),
            points,
            curve_vectors: Vec::new(),
            curve_gram: Vec::new(),
        };
        geom.check_constant_class("canonical class", &canonical)?;
        geom.canonical = canonical;

        let mut seen = BTreeSet::new();
        for p in &geom.points {
            if !seen.insert(p.clone()) {
                return Err(LatticeError::DuplicateName(p.clone()));
            }
        }
        let mut named = Vec::with_capacity(curves.len());
        let mut curve_names = BTreeSet::new();
        for spec in curves {
            if !curve_names.insert(spec.name.clone()) {
                return Err(LatticeError::DuplicateName(spec.name));
            }
            geom.check_constant_class(&spec.name, &spec.class)?;
            let computed = geom.intersect_const(&spec.class, &spec.class);
            if let Some(declared) = &spec.self_intersection {
                if declared != &computed {
                    return Err(LatticeError::SelfIntersectionMismatch {
                        curve: spec.name,
                        declared: format_rational(declared),
                        computed: format_rational(&computed),
                    });
                }
            }
            if let Some(m) = &spec.local_multiplicities {
                if let Some(p) = m.keys().find(|p| !geom.points.contains(p)) {
                    return Err(LatticeError::UnknownPoint { curve: spec.name, point: p.clone() });
                }
            }
            named.push(NamedCurve {
                name: spec.name,
                class: spec.class,
                self_intersection: computed,
                local_multiplicities: spec.local_multiplicities,
            });
        }
        geom.curve_vectors = named
            .iter()
            .map(|c| geom.to_vector(&c.class))
            .collect::<Result<_, _>>()?;
        geom.curve_gram = geom
            .curve_vectors
            .iter()
            .map(|x| geom.curve_vectors.iter().map(|y| geom.pair_vectors(x, y)).collect())
            .collect();
        geom.curves = named;
        Ok(geom)
    }

    fn check_constant_class(&self, what: &str, class: &DivisorClass) -> Result<(), LatticeError> {
        self.check_names(class)?;
        if !class.is_constant() {
            return Err(LatticeError::NonConstantClass(what.to_string()));
        }
        Ok(())
    }

    pub fn check_names(&self, class: &DivisorClass) -> Result<(), LatticeError> {
        match class.names().find(|n| !self.index.contains_key(*n)) {
            Some(n) => Err(LatticeError::UnknownBasisName(n.to_string())),
            None => Ok(()),
        }
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn gram(&self) -> &[Vec<Rational>] {
        &self.gram
    }

    pub fn canonical(&self) -> &DivisorClass {
        &self.canonical
    }

    pub fn minus_k(&self) -> DivisorClass {
        DivisorClass::zero().sub(&self.canonical)
    }

    pub fn curves(&self) -> &[NamedCurve] {
        &self.curves
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn curve(&self, name: &str) -> Option<&NamedCurve> {
        self.curves.iter().find(|c| c.name == name)
    }

    pub fn curve_index(&self, name: &str) -> Option<usize> {
        self.curves.iter().position(|c| c.name == name)
    }

    pub fn basis_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Bilinear pairing; coefficients may be polynomials.
    pub fn intersect(&self, a: &DivisorClass, b: &DivisorClass) -> Result<Polynomial, LatticeError> {
        self.check_names(a)?;
        self.check_names(b)?;
        let mut acc = Polynomial::zero();
        for (na, pa) in a.iter() {
            let i = self.index[na];
            for (nb, pb) in b.iter() {
                let g = &self.gram[i][self.index[nb]];
                if !g.is_zero() {
                    acc = &acc + &(pa * pb).scale(g);
                }
            }
        }
        Ok(acc)
    }

    /// Pairing of constant classes with names already checked.
    pub(crate) fn intersect_const(&self, a: &DivisorClass, b: &DivisorClass) -> Rational {
        let mut acc = Rational::zero();
        for (na, pa) in a.iter() {
            let i = self.index[na];
            for (nb, pb) in b.iter() {
                acc += &self.gram[i][self.index[nb]] * pa.coeff(0) * pb.coeff(0);
            }
        }
        acc
    }

    /// Dense coefficient vector of a constant class.
    pub fn to_vector(&self, class: &DivisorClass) -> Result<Vec<Rational>, LatticeError> {
        self.check_names(class)?;
        let mut v = vec![Rational::zero(); self.rank()];
        for (name, p) in class.iter() {
            if !p.is_constant() {
                return Err(LatticeError::NonConstantClass(class.to_string()));
            }
            v[self.index[name]] = p.coeff(0);
        }
        Ok(v)
    }

    pub fn from_vector(&self, v: &[Rational]) -> DivisorClass {
        DivisorClass::from_constants(self.basis.iter().map(String::as_str).zip(v.iter().cloned()))
    }

    /// `x^T G y` on dense vectors.
    pub fn pair_vectors(&self, x: &[Rational], y: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if !yj.is_zero() {
                    acc += xi * &self.gram[i][j] * yj;
                }
            }
        }
        acc
    }

    /// Curves failing the parity `C² + K·C ∈ 2ℤ`, as warnings only.
    pub fn adjunction_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.curves {
            let kc = self.intersect_const(&self.canonical, &c.class);
            let total = &c.self_intersection + &kc;
            let ok = total.is_integer() && total.to_integer().is_even();
            if !ok {
                out.push(format!(
                    "curve {}: C^2 + K.C = {} is not an even integer",
                    c.name,
                    format_rational(&total)
                ));
            }
        }
        out
    }

    /// Dense class vectors of the declared curves, in declaration order.
    pub fn curve_vectors(&self) -> &[Vec<Rational>] {
        &self.curve_vectors
    }

    /// Pairwise intersections of the declared curves.
    pub fn curve_gram(&self) -> &[Vec<Rational>] {
        &self.curve_gram
    }
}
