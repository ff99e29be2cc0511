//! Seeded random surfaces: blowups of ℙ² and of Hirzebruch surfaces at a few
//! general points, with their negative curves and some nef classes.

use kflag::lattice::{CurveSpec, DivisorClass, SurfaceGeometry};
use kflag::ratfn::{int, rat, Rational};
use rand::seq::SliceRandom;
use rand::Rng;

pub struct RandomSurface {
    pub geom: SurfaceGeometry,
    /// Classes known to be nef against every declared curve.
    pub nef: Vec<DivisorClass>,
    pub label: String,
}

fn class(pairs: &[(&str, i64)]) -> DivisorClass {
    DivisorClass::from_constants(pairs.iter().map(|(n, c)| (*n, int(*c))))
}

fn spec(name: String, class: DivisorClass) -> CurveSpec {
    CurveSpec { name, class, self_intersection: None, local_multiplicities: None }
}

/// ℙ² blown up at `k ≤ 3` points.
pub fn plane_blowup(k: usize) -> RandomSurface {
    let mut basis = vec!["l".to_string()];
    basis.extend((1..=k).map(|i| format!("e{i}")));
    let r = basis.len();
    let mut gram = vec![vec![int(0); r]; r];
    gram[0][0] = int(1);
    for i in 1..r {
        gram[i][i] = int(-1);
    }
    let mut canon = class(&[("l", -3)]);
    for b in &basis[1..] {
        canon = canon.add(&DivisorClass::basis(b));
    }
    let mut curves = Vec::new();
    for i in 1..=k {
        curves.push(spec(format!("e{i}"), DivisorClass::basis(&format!("e{i}"))));
    }
    for i in 1..=k {
        for j in i + 1..=k {
            let c = class(&[("l", 1), (&format!("e{i}"), -1), (&format!("e{j}"), -1)]);
            curves.push(spec(format!("L{i}{j}"), c));
        }
    }
    let mut nef = vec![class(&[("l", 1)])];
    for i in 1..=k {
        nef.push(class(&[("l", 1), (&format!("e{i}"), -1)]));
    }
    if k == 3 {
        nef.push(class(&[("l", 2), ("e1", -1), ("e2", -1), ("e3", -1)]));
    }
    let geom = SurfaceGeometry::new(basis, gram, canon, curves, vec![]).unwrap();
    RandomSurface { geom, nef, label: format!("P2 blown up at {k}") }
}

/// Hirzebruch surface 𝔽_n blown up at `k` general points (`k ≤ 2` when n = 0).
pub fn hirzebruch_blowup(n: i64, k: usize) -> RandomSurface {
    let mut basis = vec!["sigma".to_string(), "f".to_string()];
    basis.extend((1..=k).map(|i| format!("e{i}")));
    let r = basis.len();
    let mut gram = vec![vec![int(0); r]; r];
    gram[0][0] = int(-n);
    gram[0][1] = int(1);
    gram[1][0] = int(1);
    for i in 2..r {
        gram[i][i] = int(-1);
    }
    // K = −2σ − (n+2)f + Σe
    let mut canon = class(&[("sigma", -2), ("f", -(n + 2))]);
    for b in &basis[2..] {
        canon = canon.add(&DivisorClass::basis(b));
    }
    let mut curves = vec![spec("sigma".into(), DivisorClass::basis("sigma"))];
    if k == 0 {
        curves.push(spec("f".into(), DivisorClass::basis("f")));
    }
    for i in 1..=k {
        let e = format!("e{i}");
        curves.push(spec(e.clone(), DivisorClass::basis(&e)));
        curves.push(spec(format!("F{i}"), class(&[("f", 1), (&e, -1)])));
    }
    if n == 2 && k == 3 {
        curves.push(spec(
            "T".into(),
            class(&[("sigma", 1), ("f", 2), ("e1", -1), ("e2", -1), ("e3", -1)]),
        ));
    }
    if n == 0 && k > 0 {
        for i in 1..=k {
            curves.push(spec(format!("S{i}"), class(&[("sigma", 1), (&format!("e{i}"), -1)])));
        }
    }
    let mut nef = vec![class(&[("f", 1)]), class(&[("sigma", 1), ("f", n)])];
    for i in 1..=k {
        nef.push(class(&[("sigma", 1), ("f", n.max(1)), (&format!("e{i}"), -1)]));
    }
    let geom = SurfaceGeometry::new(basis, gram, canon, curves, vec![]).unwrap();
    RandomSurface { geom, nef, label: format!("F{n} blown up at {k}") }
}

pub fn random_surface<R: Rng>(rng: &mut R) -> RandomSurface {
    match rng.gen_range(0..3) {
        0 => plane_blowup(rng.gen_range(1..=3)),
        1 => hirzebruch_blowup(rng.gen_range(2..=4), rng.gen_range(0..=3)),
        _ => hirzebruch_blowup(0, rng.gen_range(0..=2)),
    }
}

pub fn small_rational<R: Rng>(rng: &mut R, max: i64) -> Rational {
    rat(rng.gen_range(0..=max), rng.gen_range(1..=4))
}

/// Nef combination plus an effective combination of declared curves.
pub fn random_pseff<R: Rng>(rng: &mut R, s: &RandomSurface) -> DivisorClass {
    let mut d = DivisorClass::zero();
    for n in &s.nef {
        if rng.gen_bool(0.6) {
            d = d.add(&n.scale(&small_rational(rng, 6)));
        }
    }
    let mut curves: Vec<_> = s.geom.curves().iter().collect();
    curves.shuffle(rng);
    for c in curves.iter().take(rng.gen_range(0..=3)) {
        d = d.add(&c.class.scale(&small_rational(rng, 4)));
    }
    d
}

/// A nonzero effective combination of declared curves.
pub fn random_effective<R: Rng>(rng: &mut R, s: &RandomSurface) -> DivisorClass {
    let curves = s.geom.curves();
    loop {
        let mut d = DivisorClass::zero();
        for c in curves {
            if rng.gen_bool(0.3) {
                d = d.add(&c.class.scale(&rat(rng.gen_range(1..=3), rng.gen_range(1..=2))));
            }
        }
        if !d.is_zero() {
            return d;
        }
    }
}

/// The same surface with its curve list permuted.
pub fn shuffled<R: Rng>(rng: &mut R, geom: &SurfaceGeometry) -> SurfaceGeometry {
    let mut specs: Vec<CurveSpec> = geom
        .curves()
        .iter()
        .map(|c| spec(c.name.clone(), c.class.clone()))
        .collect();
    specs.shuffle(rng);
    SurfaceGeometry::new(
        geom.basis().to_vec(),
        geom.gram().to_vec(),
        geom.canonical().clone(),
        specs,
        geom.points().to_vec(),
    )
    .unwrap()
}
