//! Divisor classes, surface intersection forms, 3-fold triple forms and the
//! chamber data of a ray `−K_X − uS`.

mod class;
mod ray;
mod surface;
mod triple;
mod validate;

pub use class::DivisorClass;
pub use ray::{restricted_square, CurvePairing, PairedCurve, RayChamber, Restriction, ThreefoldRay};
pub use surface::{CurveSpec, NamedCurve, SurfaceGeometry};
pub use triple::{triple_eval, TripleForm};
pub use validate::{validate_chambers, validate_ray, ValidationReport, Violation, ViolationKind};

#[cfg(test)]
pub(crate) use surface::fixtures;

use crate::ratfn::Polynomial;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("unknown basis name {0:?}")]
    UnknownBasisName(String),
    #[error("unknown divisor {0:?}")]
    UnknownDivisor(String),
    #[error("unknown curve {0:?}")]
    UnknownCurve(String),
    #[error("curve {curve:?} references undeclared point {point:?}")]
    UnknownPoint { curve: String, point: String },
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
    #[error("gram matrix is not symmetric at ({a}, {b})")]
    AsymmetricGram { a: String, b: String },
    #[error("curve {curve:?}: declared self-intersection {declared}, gram gives {computed}")]
    SelfIntersectionMismatch { curve: String, declared: String, computed: String },
    #[error("{0} must have constant coefficients")]
    NonConstantClass(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Bilinear pairing on `geom`.
pub fn intersect(
    geom: &SurfaceGeometry,
    a: &DivisorClass,
    b: &DivisorClass,
) -> Result<Polynomial, LatticeError> {
    geom.intersect(a, b)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::ratfn::{int, Rational};

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn k(c: i64) -> Polynomial {
        Polynomial::constant(int(c))
    }

    fn lin(a: i64, b: i64) -> Polynomial {
        Polynomial::linear(int(a), int(b))
    }

    /// Degree-4 del Pezzo with the conic A = l − e1 and E_S = 2l − e2 − … − e5.
    fn dp4() -> SurfaceGeometry {
        let a = DivisorClass::from_constants([("l", int(1)), ("e1", int(-1))]);
        let es = DivisorClass::from_constants([
            ("l", int(2)),
            ("e2", int(-1)),
            ("e3", int(-1)),
            ("e4", int(-1)),
            ("e5", int(-1)),
        ]);
        fixtures::blown_up_plane_with(5, vec![("A", a), ("ES", es)])
    }

    fn table(rows: &[(&str, &[(&str, i64)])]) -> Vec<Vec<Rational>> {
        let geom = dp4();
        rows.iter()
            .map(|(_, entries)| {
                let c = DivisorClass::from_constants(entries.iter().map(|(n, x)| (*n, int(*x))));
                geom.to_vector(&c).unwrap()
            })
            .collect()
    }

    /// Ray `−K − uS` with S = H − E on the (H, E) lattice of degree 22.
    fn ray_s() -> (ThreefoldRay, SurfaceGeometry) {
        let geom = dp4();
        let mut t = TripleForm::new(names(&["H", "E"]));
        t.set("H", "H", "H", int(4)).unwrap();
        t.set("H", "E", "E", int(-2)).unwrap();
        t.set("E", "E", "E", int(-2)).unwrap();
        let minus_ks: &[(&str, i64)] =
            &[("l", 3), ("e1", -1), ("e2", -1), ("e3", -1), ("e4", -1), ("e5", -1)];
        let es: &[(&str, i64)] = &[("l", 2), ("e2", -1), ("e3", -1), ("e4", -1), ("e5", -1)];
        let restriction = Restriction::new(
            names(&["H", "E"]),
            geom.basis().to_vec(),
            table(&[("H", minus_ks), ("E", es)]),
        )
        .unwrap();
        let chambers = vec![
            RayChamber {
                u_lo: int(0),
                u_hi: int(1),
                positive: DivisorClass::from_polys([("H", lin(2, -1)), ("E", lin(-1, 1))]),
                negative: vec![],
                restricted_negative: vec![],
            },
            RayChamber {
                u_lo: int(1),
                u_hi: int(2),
                positive: DivisorClass::from_polys([("H", lin(2, -1))]),
                negative: vec![("E".into(), lin(-1, 1))],
                restricted_negative: vec![("ES".into(), lin(-1, 1))],
            },
        ];
        let ray = ThreefoldRay {
            name: "S".into(),
            basis: names(&["H", "E"]),
            triple: t,
            minus_k: DivisorClass::from_polys([("H", k(2)), ("E", k(-1))]),
            ray_divisor: DivisorClass::from_polys([("H", k(1)), ("E", k(-1))]),
            tau: int(2),
            divisors: BTreeMap::new(),
            chambers,
            restriction,
        };
        (ray, geom)
    }

    #[test]
    fn valid_ray_has_no_violations() {
        let (ray, geom) = ray_s();
        let report = validate_ray(&ray, &geom, None);
        assert!(report.is_ok(), "{report}");
        assert_eq!(ray.minus_k_cubed().unwrap(), int(22));
    }

    #[test]
    fn flipped_negative_coefficient_is_reported() {
        let (mut ray, geom) = ray_s();
        ray.chambers[1].negative[0].1 = lin(1, -1);
        let report = validate_ray(&ray, &geom, None);
        assert!(report.violations.iter().any(|v| v.kind == ViolationKind::NegativeCoefficient));
    }

    #[test]
    fn gap_is_a_tiling_violation() {
        let (mut ray, geom) = ray_s();
        ray.chambers[1].u_lo = Rational::new(3.into(), 2.into());
        let report = validate_ray(&ray, &geom, None);
        assert!(report.violations.iter().any(|v| v.kind == ViolationKind::Tiling));
    }

    #[test]
    fn pairing_catches_non_nef_positive_part() {
        let (ray, geom) = ray_s();
        // P·γ = E-coefficient·(−1) goes negative on [0,1): a toy curve with E·γ = 1.
        let pairing = CurvePairing {
            curves: vec![PairedCurve { name: "g".into(), pairing: [("E".to_string(), int(1))].into() }],
        };
        let report = validate_ray(&ray, &geom, Some(&pairing));
        assert!(report.violations.iter().any(|v| v.kind == ViolationKind::NotNef));
    }

    #[test]
    fn wrong_restricted_negative_is_reported() {
        let (mut ray, geom) = ray_s();
        ray.chambers[1].restricted_negative = vec![("A".into(), lin(-1, 1))];
        let report = validate_ray(&ray, &geom, None);
        assert!(report.violations.iter().any(|v| v.kind == ViolationKind::Restriction));
    }
}
