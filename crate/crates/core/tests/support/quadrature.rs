//! Floating-point quadrature over exact traces.

use kflag::ratfn::{to_f64, Rational};
use kflag::sinv::{Trace, TraceTerm};

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// `∫∫` over every inner chamber of the piece on `n × n` Simpson grids.
/// `None` when the piece has no fixed layout.
pub fn inner_double_integral(term: &TraceTerm, piece: usize, n: usize) -> Option<f64> {
    let p = &term.inner[piece];
    let chambers = p.chambers.as_ref()?;
    let total = chambers
        .iter()
        .map(|ch| {
            simpson(
                |u| simpson(|v| ch.integrand.eval_f64(u, v), ch.v_lo.eval_f64(u), ch.v_hi.eval_f64(u), n),
                to_f64(&p.u_lo),
                to_f64(&p.u_hi),
                n,
            )
        })
        .sum();
    Some(total)
}

pub fn relative_error(numeric: f64, exact: &Rational) -> f64 {
    let e = to_f64(exact);
    let scale = e.abs().max(1e-12);
    (numeric - e).abs() / scale
}

#[derive(Debug, Default)]
pub struct Agreement {
    pub double_pieces: usize,
    pub single_pieces: usize,
    pub skipped_layouts: usize,
    pub worst: f64,
}

/// Compares every piece of every term against quadrature.
pub fn check_trace(trace: &Trace, n2: usize, n1: usize, out: &mut Agreement) {
    let mut numeric_total = 0.0;
    for term in &trace.terms {
        for (lo, hi, poly) in term.integrand.pieces() {
            let num = simpson(|x| poly.eval_f64(x), to_f64(lo), to_f64(hi), n1);
            let exact = poly.integrate(lo, hi);
            if to_f64(&exact).abs() > 1e-12 || num.abs() > 1e-12 {
                out.worst = out.worst.max(relative_error(num, &exact));
            }
            out.single_pieces += 1;
        }
        for i in 0..term.inner.len() {
            let p = &term.inner[i];
            let exact = term.integrand.integrate(&p.u_lo, &p.u_hi).unwrap();
            match inner_double_integral(term, i, n2) {
                Some(num) => {
                    if to_f64(&exact).abs() > 1e-12 || num.abs() > 1e-12 {
                        out.worst = out.worst.max(relative_error(num, &exact));
                    }
                    out.double_pieces += 1;
                }
                None => out.skipped_layouts += 1,
            }
        }
        numeric_total += to_f64(&term.prefactor) * simpson_term(term, n1);
    }
    let exact = trace.reintegrate();
    if to_f64(&exact).abs() > 1e-12 {
        out.worst = out.worst.max(relative_error(numeric_total, &exact));
    }
}

fn simpson_term(term: &TraceTerm, n: usize) -> f64 {
    term.integrand.pieces().map(|(lo, hi, p)| simpson(|x| p.eval_f64(x), to_f64(lo), to_f64(hi), n)).sum()
}
