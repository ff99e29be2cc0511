use std::collections::BTreeMap;

use num_traits::Zero;

use super::SinvError;
use crate::lattice::{
    validate_ray, CurveSpec, DivisorClass, LatticeError, SurfaceGeometry, ThreefoldRay,
};
use crate::ratfn::{int, Polynomial, Rational};

/// A ray chamber seen on the flag surface.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceChamber {
    pub u_lo: Rational,
    pub u_hi: Rational,
    /// `P(u)|_S`.
    pub positive: DivisorClass,
    /// `(P(u)|_S)²`.
    pub p2s: Polynomial,
    /// `N(u)|_S` by curve.
    pub negative: Vec<(String, Polynomial)>,
}

/// The restricted chamber data of a ray on one surface.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagSurface {
    pub geom: SurfaceGeometry,
    pub minus_k_cubed: Rational,
    pub chambers: Vec<SurfaceChamber>,
}

impl FlagSurface {
    /// Validates the ray against `geom` and restricts each chamber.
    pub fn new(ray: &ThreefoldRay, geom: &SurfaceGeometry) -> Result<Self, SinvError> {
        let report = validate_ray(ray, geom, None);
        if !report.is_ok() {
            return Err(SinvError::InvalidRay(report.to_string()));
        }
        let minus_k_cubed = ray.minus_k_cubed()?;
        let mut chambers = Vec::with_capacity(ray.chambers.len());
        for ch in &ray.chambers {
            let positive = ray.restriction.apply(&ch.positive)?;
            let p2s = geom.intersect(&positive, &positive)?;
            chambers.push(SurfaceChamber {
                u_lo: ch.u_lo.clone(),
                u_hi: ch.u_hi.clone(),
                positive,
                p2s,
                negative: ch.restricted_negative.clone(),
            });
        }
        Ok(Self { geom: geom.clone(), minus_k_cubed, chambers })
    }

    pub fn lo(&self) -> &Rational {
        &self.chambers[0].u_lo
    }

    pub fn hi(&self) -> &Rational {
        &self.chambers[self.chambers.len() - 1].u_hi
    }

    /// Coefficient of `curve` in `N(u)|_S` on chamber `i`.
    pub fn ord(&self, i: usize, curve: &str) -> Polynomial {
        self.chambers[i]
            .negative
            .iter()
            .filter(|(n, _)| n == curve)
            .fold(Polynomial::zero(), |acc, (_, c)| &acc + c)
    }

    /// The same chamber data pulled back to the blowup at `point`.
    /// `N(u)|_S` pulls back to its strict transform plus `Σ c_Q·m_Q` times
    /// the exceptional curve.
    pub fn blown_up(
        &self,
        point: &str,
        multiplicities: &BTreeMap<String, u32>,
        exceptional_points: &BTreeMap<String, BTreeMap<String, u32>>,
    ) -> Result<(FlagSurface, Blowup), SinvError> {
        let blowup = blowup_surface(&self.geom, point, multiplicities, exceptional_points)?;
        let mut chambers = self.chambers.clone();
        for ch in &mut chambers {
            let mut ord_e = Polynomial::zero();
            for (name, c) in &ch.negative {
                let m = blowup.multiplicities.get(name).copied().unwrap_or(0);
                ord_e = &ord_e + &c.scale(&int(m.into()));
            }
            if !ord_e.is_zero() {
                ch.negative.push((blowup.exceptional.clone(), ord_e));
            }
        }
        let fs = FlagSurface {
            geom: blowup.geometry.clone(),
            minus_k_cubed: self.minus_k_cubed.clone(),
            chambers,
        };
        Ok((fs, blowup))
    }
}

/// Output of [`blowup_surface`].
#[derive(Clone, Debug)]
pub struct Blowup {
    pub geometry: SurfaceGeometry,
    /// Name of the exceptional curve and basis element.
    pub exceptional: String,
    /// Multiplicity at the blown-up point used for every declared curve.
    pub multiplicities: BTreeMap<String, u32>,
    /// InconsistentMultiplicity warnings.
    pub warnings: Vec<String>,
}

/// Blowup of `geom` at `point`. Multiplicities come from `multiplicities`,
/// then from the curves' own local data, else 0. `exceptional_points` names
/// points on the exceptional curve with the multiplicities of strict
/// transforms there.
pub fn blowup_surface(
    geom: &SurfaceGeometry,
    point: &str,
    multiplicities: &BTreeMap<String, u32>,
    exceptional_points: &BTreeMap<String, BTreeMap<String, u32>>,
) -> Result<Blowup, SinvError> {
    if !geom.points().iter().any(|p| p == point) {
        return Err(SinvError::Lattice(LatticeError::UnknownPoint {
            curve: "<blowup>".into(),
            point: point.into(),
        }));
    }
    for name in multiplicities.keys().chain(exceptional_points.values().flat_map(|m| m.keys())) {
        if geom.curve(name).is_none() {
            return Err(SinvError::Lattice(LatticeError::UnknownCurve(name.clone())));
        }
    }
    let e = format!("E_{point}");
    let mut basis = geom.basis().to_vec();
    basis.push(e.clone());
    let r = basis.len();
    let mut gram: Vec<Vec<Rational>> = geom
        .gram()
        .iter()
        .map(|row| row.iter().cloned().chain([Rational::zero()]).collect())
        .collect();
    let mut last = vec![Rational::zero(); r];
    last[r - 1] = int(-1);
    gram.push(last);
    let canonical = geom.canonical().add(&DivisorClass::basis(&e));

    let mut points: Vec<String> = geom.points().iter().filter(|p| *p != point).cloned().collect();
    points.extend(exceptional_points.keys().cloned());

    let mut used = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut curves = Vec::new();
    for c in geom.curves() {
        let m = multiplicities
            .get(&c.name)
            .copied()
            .or_else(|| c.multiplicity_at(point))
            .unwrap_or(0);
        used.insert(c.name.clone(), m);
        let mut local = c.local_multiplicities.clone().map(|mut l| {
            l.remove(point);
            l
        });
        if m > 0 {
            let l = local.get_or_insert_with(BTreeMap::new);
            for (q, ms) in exceptional_points {
                l.insert(q.clone(), ms.get(&c.name).copied().unwrap_or(0));
            }
        }
        let m_r = int(m.into());
        // p_a(C) = (C² + K·C)/2 + 1 drops by m(m − 1)/2.
        let kc = geom.intersect(geom.canonical(), &c.class)?.coeff(0);
        let two_pa = &c.self_intersection + &kc + int(2);
        if two_pa < &m_r * (&m_r - int(1)) {
            warnings.push(format!(
                "InconsistentMultiplicity: {} has multiplicity {m} at {point}, more than its arithmetic genus allows",
                c.name
            ));
        }
        curves.push(CurveSpec {
            name: c.name.clone(),
            class: c.class.sub(&DivisorClass::basis(&e).scale(&m_r)),
            self_intersection: Some(&c.self_intersection - &m_r * &m_r),
            local_multiplicities: local,
        });
    }
    curves.push(CurveSpec {
        name: e.clone(),
        class: DivisorClass::basis(&e),
        self_intersection: Some(int(-1)),
        local_multiplicities: Some(exceptional_points.keys().map(|q| (q.clone(), 1)).collect()),
    });
    let geometry = SurfaceGeometry::new(basis, gram, canonical, curves, points)?;
    Ok(Blowup { geometry, exceptional: e, multiplicities: used, warnings })
}
