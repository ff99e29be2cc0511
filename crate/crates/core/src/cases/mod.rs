//! Case files: a surface, an optional ray, a list of flags and the expected
//! values of functionals on them.

mod eval;
mod report;
pub mod schema;

use std::path::Path;

pub use eval::{evaluate, Evaluation, EvalError, Evaluator, FUNCTIONALS};
pub use report::{rational_text, run_bytes, run_case, trace_json, CaseReport, Check, FlagRow, Render, ResultRow, TraceRow};

use crate::lattice::{
    validate_ray, CurvePairing, CurveSpec, DivisorClass, LatticeError, PairedCurve, RayChamber,
    Restriction, SurfaceGeometry, ThreefoldRay, TripleForm,
};
use crate::ratfn::{Polynomial, Rational};
use crate::sinv::FlagVariant;
use schema::{CaseSpec, ClassSpec, CurveTermSpec, FlagSpecRaw, Overrides, PolySpec, RaySpec, SurfaceSpec, Q};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CaseError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
}

/// How a flag is evaluated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlagKind {
    Sinv { variant: FlagVariant, target_point: Option<String> },
    SurfaceBound { ord_curve: String, inverse_delta: Vec<Polynomial> },
    Curves(Vec<String>),
    Bound(Vec<PartRef>),
    Fiber { delta: Rational, on_exceptional: bool },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartRef {
    pub flag: usize,
    pub functional: String,
    pub log_discrepancy: Option<Rational>,
}

/// A flag with its effective surface and ray.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flag {
    pub kind: FlagKind,
    pub surface: SurfaceGeometry,
    pub ray: Option<ThreefoldRay>,
}

impl Flag {
    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            FlagKind::Sinv { variant, .. } => variant.kind(),
            FlagKind::SurfaceBound { .. } => "surface_bound",
            FlagKind::Curves(_) => "curves",
            FlagKind::Bound(_) => "bound",
            FlagKind::Fiber { .. } => "fiber",
        }
    }
}

/// A loaded and validated case.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseFile {
    pub spec: CaseSpec,
    pub surface: SurfaceGeometry,
    pub ray: Option<ThreefoldRay>,
    pub pairing: Option<CurvePairing>,
    pub flags: Vec<Flag>,
    pub warnings: Vec<String>,
}

impl CaseFile {
    pub fn name(&self) -> &str {
        &self.spec.name
    }
}

/// Parses and schema-checks a case without building it.
pub fn parse_case(bytes: &[u8]) -> Result<CaseSpec, CaseError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let spec: CaseSpec = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        classify(inner, Some(path))
    })?;
    de.end().map_err(|e| classify(e, None))?;
    Ok(spec)
}

fn classify(e: serde_json::Error, path: Option<String>) -> CaseError {
    use serde_json::error::Category;
    match e.classify() {
        Category::Data => CaseError::Schema { path: path.unwrap_or_else(|| ".".into()), message: e.to_string() },
        _ => CaseError::Parse { line: e.line(), column: e.column(), message: e.to_string() },
    }
}

pub fn load_case(bytes: &[u8]) -> Result<CaseFile, CaseError> {
    build(parse_case(bytes)?)
}

pub fn load_case_file(path: &Path) -> Result<CaseFile, CaseError> {
    let bytes = std::fs::read(path).map_err(|e| CaseError::Io(format!("{}: {e}", path.display())))?;
    load_case(&bytes)
}

/// Pretty JSON; `load_case(serialize(c))` gives back `c`.
pub fn serialize(case: &CaseFile) -> String {
    let mut s = serde_json::to_string_pretty(&case.spec).expect("case specs always serialize");
    s.push('\n');
    s
}

fn invalid(e: LatticeError) -> CaseError {
    CaseError::Validation(e.to_string())
}

fn class(spec: &ClassSpec) -> DivisorClass {
    DivisorClass::from_constants(spec.iter().map(|(n, q)| (n.as_str(), q.0.clone())))
}

fn poly(spec: &PolySpec) -> Polynomial {
    Polynomial::from_coeffs(spec.iter().map(|q| q.0.clone()).collect())
}

fn matrix(rows: &[Vec<Q>]) -> Vec<Vec<Rational>> {
    rows.iter().map(|r| r.iter().map(|q| q.0.clone()).collect()).collect()
}

fn terms(spec: &[CurveTermSpec]) -> Vec<(String, Polynomial)> {
    spec.iter().map(|t| (t.curve.clone(), poly(&t.coeff))).collect()
}

pub fn build_surface(spec: &SurfaceSpec) -> Result<SurfaceGeometry, LatticeError> {
    let curves = spec
        .curves
        .iter()
        .map(|c| CurveSpec {
            name: c.name.clone(),
            class: class(&c.class),
            self_intersection: c.self_intersection.as_ref().map(|q| q.0.clone()),
            local_multiplicities: c.local_multiplicities.clone(),
        })
        .collect();
    SurfaceGeometry::new(
        spec.basis.clone(),
        matrix(&spec.gram),
        class(&spec.canonical),
        curves,
        spec.points.clone(),
    )
}

fn build_ray(spec: &RaySpec, target: &[String]) -> Result<ThreefoldRay, CaseError> {
    let mut triple = TripleForm::new(spec.basis.clone());
    for (key, q) in &spec.triple {
        let parts: Vec<&str> = key.split('.').collect();
        let [a, b, c] = parts[..] else {
            return Err(CaseError::Schema {
                path: format!("ray.triple.{key}"),
                message: "triple keys have the form \"A.B.C\"".into(),
            });
        };
        triple.set(a, b, c, q.0.clone()).map_err(invalid)?;
    }
    let chambers = spec
        .chambers
        .iter()
        .map(|c| RayChamber {
            u_lo: c.u_lo.0.clone(),
            u_hi: c.u_hi.0.clone(),
            positive: DivisorClass::from_polys(c.positive.iter().map(|(n, p)| (n.as_str(), poly(p)))),
            negative: c.negative.iter().map(|t| (t.divisor.clone(), poly(&t.coeff))).collect(),
            restricted_negative: terms(&c.restricted_negative),
        })
        .collect();
    let restriction = Restriction::new(spec.basis.clone(), target.to_vec(), matrix(&spec.restriction)).map_err(invalid)?;
    Ok(ThreefoldRay {
        name: spec.name.clone(),
        basis: spec.basis.clone(),
        triple,
        minus_k: class(&spec.minus_k),
        ray_divisor: class(&spec.ray_divisor),
        tau: spec.tau.0.clone(),
        divisors: spec.divisors.iter().map(|(n, c)| (n.clone(), class(c))).collect(),
        chambers,
        restriction,
    })
}

fn check_ray(ray: &ThreefoldRay, geom: &SurfaceGeometry, pairing: Option<&CurvePairing>, what: &str) -> Result<Vec<String>, CaseError> {
    let report = validate_ray(ray, geom, pairing);
    if !report.is_ok() {
        return Err(CaseError::Validation(format!("{what}: {report}")));
    }
    Ok(report.warnings)
}

fn apply_overrides(
    ov: &Overrides,
    index: usize,
    surface: &SurfaceGeometry,
    ray: Option<&ThreefoldRay>,
) -> Result<(SurfaceGeometry, Option<ThreefoldRay>), CaseError> {
    let geom = match &ov.surface {
        Some(s) => build_surface(s).map_err(invalid)?,
        None => surface.clone(),
    };
    let Some(ray) = ray else {
        if ov.restriction.is_some() || ov.restricted_negative.is_some() {
            return Err(CaseError::Schema {
                path: format!("flags[{index}].overrides"),
                message: "ray overrides need a ray".into(),
            });
        }
        return Ok((geom, None));
    };
    let mut ray = ray.clone();
    if let Some(rows) = &ov.restriction {
        ray.restriction = Restriction::new(ray.basis.clone(), geom.basis().to_vec(), matrix(rows)).map_err(invalid)?;
    } else if ov.surface.is_some() {
        ray.restriction =
            Restriction::new(ray.basis.clone(), geom.basis().to_vec(), ray.restriction.matrix.clone()).map_err(invalid)?;
    }
    if let Some(lists) = &ov.restricted_negative {
        if lists.len() != ray.chambers.len() {
            return Err(CaseError::Schema {
                path: format!("flags[{index}].overrides.restricted_negative"),
                message: format!("expected {} lists, one per chamber", ray.chambers.len()),
            });
        }
        for (ch, l) in ray.chambers.iter_mut().zip(lists) {
            ch.restricted_negative = terms(l);
        }
    }
    Ok((geom, Some(ray)))
}

fn q_or(q: &Option<Q>, default: i64) -> Rational {
    q.as_ref().map(|q| q.0.clone()).unwrap_or_else(|| Rational::from_integer(default.into()))
}

fn build(spec: CaseSpec) -> Result<CaseFile, CaseError> {
    let surface = build_surface(&spec.surface).map_err(invalid)?;
    let mut warnings = surface.adjunction_warnings();
    let pairing = spec.pairing.as_ref().map(|ps| CurvePairing {
        curves: ps
            .iter()
            .map(|p| PairedCurve {
                name: p.name.clone(),
                pairing: p.pairing.iter().map(|(n, q)| (n.clone(), q.0.clone())).collect(),
            })
            .collect(),
    });
    let ray = spec.ray.as_ref().map(|r| build_ray(r, surface.basis())).transpose()?;
    if let Some(r) = &ray {
        warnings.extend(check_ray(r, &surface, pairing.as_ref(), "ray")?);
    }

    let mut flags = Vec::with_capacity(spec.flags.len());
    for (i, raw) in spec.flags.iter().enumerate() {
        let (geom, fray) = match raw.overrides() {
            Some(ov) => apply_overrides(ov, i, &surface, ray.as_ref())?,
            None => (surface.clone(), ray.clone()),
        };
        let uses_ray = !matches!(raw, FlagSpecRaw::Curves { .. } | FlagSpecRaw::Bound { .. } | FlagSpecRaw::Fiber { .. });
        if raw.overrides().is_some_and(|o| !o.is_empty()) && uses_ray {
            if let Some(r) = &fray {
                warnings.extend(check_ray(r, &geom, pairing.as_ref(), &format!("flag {i}"))?);
            }
        }
        let kind = match raw {
            FlagSpecRaw::Divisor { .. } => FlagKind::Sinv { variant: FlagVariant::Divisor, target_point: None },
            FlagSpecRaw::Curve { curve, log_discrepancy, .. } => FlagKind::Sinv {
                variant: FlagVariant::Curve { curve: curve.clone(), log_discrepancy: q_or(log_discrepancy, 1) },
                target_point: None,
            },
            FlagSpecRaw::Point { point, curve, log_discrepancy, .. } => FlagKind::Sinv {
                variant: FlagVariant::Point {
                    point: point.clone(),
                    curve: curve.clone(),
                    log_discrepancy: q_or(log_discrepancy, 1),
                },
                target_point: None,
            },
            FlagSpecRaw::Blowup { point, multiplicities, exceptional_points, target_point, log_discrepancy, .. } => {
                FlagKind::Sinv {
                    variant: FlagVariant::Blowup {
                        point: point.clone(),
                        multiplicities: multiplicities.clone(),
                        exceptional_points: exceptional_points.clone(),
                        log_discrepancy: q_or(log_discrepancy, 2),
                    },
                    target_point: target_point.clone(),
                }
            }
            FlagSpecRaw::SurfaceBound { ord_curve, inverse_delta, .. } => FlagKind::SurfaceBound {
                ord_curve: ord_curve.clone(),
                inverse_delta: inverse_delta.iter().map(poly).collect(),
            },
            FlagSpecRaw::Curves { curves, .. } => FlagKind::Curves(curves.clone()),
            FlagSpecRaw::Bound { parts } => FlagKind::Bound(
                parts
                    .iter()
                    .map(|p| PartRef {
                        flag: p.flag,
                        functional: p.functional.clone(),
                        log_discrepancy: p.log_discrepancy.as_ref().map(|q| q.0.clone()),
                    })
                    .collect(),
            ),
            FlagSpecRaw::Fiber { delta, on_exceptional } => {
                FlagKind::Fiber { delta: delta.0.clone(), on_exceptional: *on_exceptional }
            }
        };
        check_references(&kind, &geom, i, spec.flags.len())?;
        flags.push(Flag { kind, surface: geom, ray: fray });
    }
    for (i, e) in spec.expected.iter().enumerate() {
        if e.flag >= flags.len() {
            return Err(CaseError::Validation(format!("expected[{i}] refers to missing flag {}", e.flag)));
        }
        if e.source.trim().is_empty() {
            return Err(CaseError::Schema { path: format!("expected[{i}].source"), message: "source must not be empty".into() });
        }
        if let Some(v) = &e.verdict {
            if v != "GREATER_THAN_ONE" && v != "INCONCLUSIVE" {
                return Err(CaseError::Schema {
                    path: format!("expected[{i}].verdict"),
                    message: format!("unknown verdict {v:?}"),
                });
            }
        }
    }
    Ok(CaseFile { spec, surface, ray, pairing, flags, warnings })
}

fn check_references(kind: &FlagKind, geom: &SurfaceGeometry, i: usize, n_flags: usize) -> Result<(), CaseError> {
    let curve = |c: &str| {
        geom.curve(c)
            .map(|_| ())
            .ok_or_else(|| CaseError::Validation(format!("flag {i}: unknown curve {c:?}")))
    };
    let point = |p: &str| {
        if geom.points().iter().any(|x| x == p) {
            Ok(())
        } else {
            Err(CaseError::Validation(format!("flag {i}: unknown point {p:?}")))
        }
    };
    match kind {
        FlagKind::Sinv { variant, .. } => match variant {
            FlagVariant::Divisor => Ok(()),
            FlagVariant::Curve { curve: c, .. } => curve(c),
            FlagVariant::Point { point: p, curve: c, .. } => curve(c).and(point(p)),
            FlagVariant::Blowup { point: p, multiplicities, exceptional_points, .. } => {
                point(p)?;
                for c in multiplicities.keys().chain(exceptional_points.values().flat_map(|m| m.keys())) {
                    curve(c)?;
                }
                Ok(())
            }
        },
        FlagKind::SurfaceBound { ord_curve, .. } => curve(ord_curve),
        FlagKind::Curves(cs) => cs.iter().try_for_each(|c| curve(c)),
        FlagKind::Bound(parts) => {
            for p in parts {
                if p.flag >= n_flags || p.flag == i {
                    return Err(CaseError::Validation(format!("flag {i}: bound part refers to flag {}", p.flag)));
                }
            }
            Ok(())
        }
        FlagKind::Fiber { .. } => Ok(()),
    }
}
