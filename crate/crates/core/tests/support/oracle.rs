//! Reference implementations kept independent of the library algorithms.

use kflag::lattice::{DivisorClass, SurfaceGeometry};
use kflag::ratfn::Rational;
use num_traits::{One, Signed, Zero};

fn dot(g: &SurfaceGeometry, x: &[Rational], y: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (i, row) in g.gram().iter().enumerate() {
        for (j, gij) in row.iter().enumerate() {
            acc += &x[i] * gij * &y[j];
        }
    }
    acc
}

fn vector(g: &SurfaceGeometry, c: &DivisorClass) -> Vec<Rational> {
    g.basis().iter().map(|b| c.coeff(b).coeff(0)).collect()
}

/// Gaussian elimination; `None` if singular.
fn solve(mut m: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = &m[r][col] / &m[col][col];
            for c in col..n {
                let t = &f * &m[col][c];
                m[r][c] -= t;
            }
            let t = &f * &b[col];
            b[r] -= t;
        }
    }
    let mut x = vec![Rational::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            acc -= &m[r][c] * &x[c];
        }
        x[r] = acc / &m[r][r];
    }
    Some(x)
}

/// Sylvester's criterion on −M: all leading minors of −M positive.
pub fn negative_definite(m: &[Vec<Rational>]) -> bool {
    let n = m.len();
    (1..=n).all(|k| {
        let minor: Vec<Vec<Rational>> = (0..k).map(|i| (0..k).map(|j| -&m[i][j]).collect()).collect();
        determinant(minor).is_positive()
    })
}

fn determinant(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            m.swap(col, piv);
            det = -det;
        }
        det *= &m[col][col];
        for r in col + 1..n {
            let f = &m[r][col] / &m[col][col];
            for c in col..n {
                let t = &f * &m[col][c];
                m[r][c] -= t;
            }
        }
    }
    det
}

/// Subset-enumeration Zariski decomposition. Returns the negative part as
/// (curve name, coefficient) pairs in declaration order, or `None` when no
/// subset works. Panics if two subsets both qualify.
pub fn subset_decompose(g: &SurfaceGeometry, d: &DivisorClass) -> Option<Vec<(String, Rational)>> {
    let dv = vector(g, d);
    let curves: Vec<Vec<Rational>> = g.curves().iter().map(|c| vector(g, &c.class)).collect();
    let n = curves.len();
    assert!(n <= 12, "subset oracle is exponential");
    let mut found: Option<Vec<(String, Rational)>> = None;
    for mask in 0u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let gram: Vec<Vec<Rational>> = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| dot(g, &curves[i], &curves[j])).collect())
            .collect();
        if !idx.is_empty() && !negative_definite(&gram) {
            continue;
        }
        let rhs: Vec<Rational> = idx.iter().map(|&i| dot(g, &dv, &curves[i])).collect();
        let Some(a) = solve(gram, rhs) else { continue };
        if a.iter().any(|x| !x.is_positive()) {
            continue;
        }
        let mut p = dv.clone();
        for (k, &i) in idx.iter().enumerate() {
            for (j, x) in curves[i].iter().enumerate() {
                p[j] -= &a[k] * x;
            }
        }
        if curves.iter().any(|q| dot(g, &p, q).is_negative()) {
            continue;
        }
        if dot(g, &p, &p).is_negative() {
            continue;
        }
        let neg: Vec<(String, Rational)> =
            idx.iter().zip(a).map(|(&i, x)| (g.curves()[i].name.clone(), x)).collect();
        assert!(found.is_none(), "two subsets qualify for {d}");
        found = Some(neg);
    }
    found
}

/// Oracle volume: P² from the subset oracle, 0 if none qualifies.
pub fn subset_volume(g: &SurfaceGeometry, d: &DivisorClass) -> Rational {
    match subset_decompose(g, d) {
        None => Rational::zero(),
        Some(neg) => {
            let mut p = vector(g, d);
            for (name, a) in &neg {
                let c = vector(g, &g.curve(name).unwrap().class);
                for (j, x) in c.iter().enumerate() {
                    p[j] -= a * x;
                }
            }
            dot(g, &p, &p)
        }
    }
}

/// Direct min-ratio nef threshold.
pub fn min_ratio_nef_threshold(g: &SurfaceGeometry, d: &DivisorClass, c: &DivisorClass) -> Option<Rational> {
    let dv = vector(g, d);
    let cv = vector(g, c);
    g.curves()
        .iter()
        .filter_map(|q| {
            let qv = vector(g, &q.class);
            let cq = dot(g, &cv, &qv);
            cq.is_positive().then(|| dot(g, &dv, &qv) / cq)
        })
        .min()
}
