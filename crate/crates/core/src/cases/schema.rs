//! Serde mirror of the case-file format. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ratfn::{format_rational, parse_rational, Rational};

/// A rational written as the string `"p/q"` or `"n"`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Q(pub Rational);

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct QVisitor;
        impl Visitor<'_> for QVisitor {
            type Value = Q;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational string \"p/q\" or \"n\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Q, E> {
                parse_rational(v).map(Q).map_err(E::custom)
            }
        }
        d.deserialize_str(QVisitor)
    }
}

pub type ClassSpec = BTreeMap<String, Q>;
/// Coefficient list `[c0, c1, ...]` of a polynomial in u.
pub type PolySpec = Vec<Q>;

fn is_empty<T>(v: &[T]) -> bool {
    v.is_empty()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSpec {
    pub name: String,
    pub description: String,
    pub surface: SurfaceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ray: Option<RaySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<Vec<PairedCurveSpec>>,
    pub flags: Vec<FlagSpecRaw>,
    pub expected: Vec<ExpectedSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub basis: Vec<String>,
    pub gram: Vec<Vec<Q>>,
    pub canonical: ClassSpec,
    pub curves: Vec<CurveSpecRaw>,
    #[serde(default, skip_serializing_if = "is_empty")]
    pub points: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpecRaw {
    pub name: String,
    pub class: ClassSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_intersection: Option<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_multiplicities: Option<BTreeMap<String, u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaySpec {
    pub name: String,
    pub basis: Vec<String>,
    /// Keys `"A.B.C"`.
    pub triple: BTreeMap<String, Q>,
    pub minus_k: ClassSpec,
    pub ray_divisor: ClassSpec,
    pub tau: Q,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub divisors: BTreeMap<String, ClassSpec>,
    pub chambers: Vec<ChamberSpec>,
    pub restriction: Vec<Vec<Q>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChamberSpec {
    pub u_lo: Q,
    pub u_hi: Q,
    pub positive: BTreeMap<String, PolySpec>,
    #[serde(default, skip_serializing_if = "is_empty")]
    pub negative: Vec<DivisorTermSpec>,
    pub restricted_negative: Vec<CurveTermSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivisorTermSpec {
    pub divisor: String,
    pub coeff: PolySpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveTermSpec {
    pub curve: String,
    pub coeff: PolySpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairedCurveSpec {
    pub name: String,
    pub pairing: ClassSpec,
}

/// Per-flag replacements for the case-level surface data.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restriction: Option<Vec<Vec<Q>>>,
    /// One list per ray chamber.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restricted_negative: Option<Vec<Vec<CurveTermSpec>>>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        self == &Overrides::default()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartSpec {
    pub flag: usize,
    pub functional: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_discrepancy: Option<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlagSpecRaw {
    Divisor {
        #[serde(default, skip_serializing_if = "Overrides::is_empty")]
        overrides: Overrides,
    },
    Curve {
        curve: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        log_discrepancy: Option<Q>,
        #[serde(default, skip_serializing_if = "Overrides::is_empty")]
        overrides: Overrides,
    },
    Point {
        point: String,
        curve: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        log_discrepancy: Option<Q>,
        #[serde(default, skip_serializing_if = "Overrides::is_empty")]
        overrides: Overrides,
    },
    Blowup {
        point: String,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        multiplicities: BTreeMap<String, u32>,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        exceptional_points: BTreeMap<String, BTreeMap<String, u32>>,
        /// Point on the exceptional curve for `s_blowup_point`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target_point: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        log_discrepancy: Option<Q>,
        #[serde(default, skip_serializing_if = "Overrides::is_empty")]
        overrides: Overrides,
    },
    /// Coefficient bounds for `S(W^S; F)/A(F)` over all `F` through a point.
    SurfaceBound {
        ord_curve: String,
        /// One polynomial per ray chamber.
        inverse_delta: Vec<PolySpec>,
        #[serde(default, skip_serializing_if = "Overrides::is_empty")]
        overrides: Overrides,
    },
    Curves {
        curves: Vec<String>,
        #[serde(default, skip_serializing_if = "Overrides::is_empty")]
        overrides: Overrides,
    },
    Bound {
        parts: Vec<PartSpec>,
    },
    Fiber {
        delta: Q,
        on_exceptional: bool,
    },
}

impl FlagSpecRaw {
    pub fn overrides(&self) -> Option<&Overrides> {
        match self {
            FlagSpecRaw::Divisor { overrides }
            | FlagSpecRaw::Curve { overrides, .. }
            | FlagSpecRaw::Point { overrides, .. }
            | FlagSpecRaw::Blowup { overrides, .. }
            | FlagSpecRaw::SurfaceBound { overrides, .. }
            | FlagSpecRaw::Curves { overrides, .. } => Some(overrides),
            FlagSpecRaw::Bound { .. } | FlagSpecRaw::Fiber { .. } => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FlagSpecRaw::Divisor { .. } => "divisor",
            FlagSpecRaw::Curve { .. } => "curve",
            FlagSpecRaw::Point { .. } => "point",
            FlagSpecRaw::Blowup { .. } => "blowup",
            FlagSpecRaw::SurfaceBound { .. } => "surface_bound",
            FlagSpecRaw::Curves { .. } => "curves",
            FlagSpecRaw::Bound { .. } => "bound",
            FlagSpecRaw::Fiber { .. } => "fiber",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedSpec {
    pub flag: usize,
    pub functional: String,
    pub value: Q,
    /// `GREATER_THAN_ONE` or `INCONCLUSIVE`, for `delta_bound`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    pub source: String,
}
