//! One line per acceptance criterion. Run with `cargo test --test acceptance`.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use kflag::cases::{self, evaluate, run_case, CaseFile};
use kflag::lattice::DivisorClass;
use kflag::ratfn::{int, rat, Polynomial, Rational};
use kflag::sinv::Verdict;
use kflag::zariski::{decompose, volume, walk, ZariskiError};
use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::lattices::{random_effective, random_pseff, random_surface};
use support::oracle::{negative_definite, subset_decompose, subset_volume};
use support::quadrature::{check_trace, Agreement};

fn cases_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/cases")
}

fn load(name: &str) -> CaseFile {
    cases::load_case_file(&cases_dir().join(format!("{name}.case"))).unwrap()
}

fn value(case: &CaseFile, flag: usize, functional: &str) -> Result<Rational, String> {
    evaluate(case, flag, functional)
        .map_err(|e| e.to_string())?
        .value
        .ok_or_else(|| format!("{functional} unbounded"))
}

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn expect(got: Result<Rational, String>, want: Rational, what: &str) -> Result<(), String> {
    match got {
        Ok(v) if v == want => Ok(()),
        Ok(v) => Err(format!("{what}: got {v}, want {want}")),
        Err(e) => Err(format!("{what}: {e}")),
    }
}

fn exact_regression() -> Check {
    let t = Instant::now();
    let c213 = load("family_2_13_S");
    let c216e = load("family_2_16_E");
    let c216s = load("family_2_16_S");
    let c219 = load("family_2_19_S");
    let c36 = load("family_3_6_S");
    let c37 = load("family_3_7_E");
    let checks: Vec<(&CaseFile, usize, &str, Rational, &str)> = vec![
        (&c213, 0, "s_divisor", rat(41, 80), "2.13 S_X(S)"),
        (&c216e, 2, "s_divisor", rat(23, 44), "2.16 S_X(E)"),
        (&c216e, 0, "s_curve", rat(67, 88), "2.16 S(W^E;s) on P1xP1"),
        (&c216e, 1, "s_curve", rat(41, 44), "2.16 S(W^E;s) on F2"),
        (&c216s, 0, "s_divisor", rat(13, 22), "2.16 S_X(S)"),
        (&c216s, 1, "s_surface_bound", rat(169, 176), "2.16 bound coefficient"),
        (&c219, 0, "s_curve", rat(119, 208), "2.19 S(W^S;Z), Z ~ l"),
        (&c219, 1, "s_curve", rat(183, 208), "2.19 S(W^S;Z), Z ~ l - e1 - e2"),
        (&c36, 0, "s_divisor", rat(67, 88), "3.6 S_X(S)"),
        (&c37, 0, "s_divisor", rat(3, 8), "3.7 S_X(E)"),
        (&c37, 1, "s_curve", rat(11, 16), "3.7 S(W^E;s)"),
        (&c213, 0, "minus_k_cubed", int(20), "2.13 (-K)^3"),
        (&c36, 0, "minus_k_cubed", int(22), "3.6 (-K)^3"),
        (&c37, 0, "minus_k_cubed", int(24), "3.7 (-K)^3"),
    ];
    for (case, flag, f, want, what) in &checks {
        expect(value(case, *flag, f), want.clone(), what)?;
    }
    // P(u)^3 on the 2.16 exceptional-divisor ray.
    let ray = c216e.ray.as_ref().unwrap();
    let ch = &ray.chambers[0];
    let cube = ray.triple.eval(&ch.positive, &ch.positive, &ch.positive).map_err(|e| e.to_string())?;
    let want = Polynomial::from_coeffs(vec![int(22), int(-18), int(-6), int(2)]);
    if cube != want {
        return Err(format!("P^3 = {cube}, want {want}"));
    }
    let trace = evaluate(&c216e, 2, "s_divisor").unwrap().trace.unwrap();
    if trace.terms[0].integrand.segments() != [want] {
        return Err("s_divisor trace does not carry 2u^3 - 6u^2 - 18u + 22".into());
    }
    let secs = t.elapsed().as_secs_f64();
    if secs >= 10.0 {
        return Err(format!("took {secs:.1}s"));
    }
    Ok(format!("{} values and the P^3 integrand exact in {secs:.2}s", checks.len()))
}

fn combinators() -> Check {
    let c213 = load("family_2_13_S");
    let e = evaluate(&c213, 2, "delta_bound").map_err(|e| e.to_string())?;
    if e.verdict != Some(Verdict::GreaterThanOne) || e.value != Some(rat(80, 77)) {
        return Err(format!("2.13 delta bound {:?} {:?}", e.value, e.verdict));
    }
    let c37 = load("family_3_7_E");
    expect(value(&c37, 2, "fiber_delta_bound"), rat(16, 11), "fiber bound at 3/2")?;
    expect(value(&c37, 3, "fiber_delta_bound"), int(1), "fiber bound at 15/16")?;
    expect(value(&c37, 4, "fiber_delta_bound"), int(1), "fiber bound on E at 1")?;
    Ok("delta_bound 80/77 GREATER_THAN_ONE; fiber bounds 16/11, 1, 1".into())
}

fn negative_class(geom: &kflag::lattice::SurfaceGeometry, neg: &[(String, Rational)]) -> DivisorClass {
    neg.iter().fold(DivisorClass::zero(), |acc, (n, a)| acc.add(&geom.curve(n).unwrap().class.scale(a)))
}

fn properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..200 {
        let s = random_surface(&mut rng);
        let g = &s.geom;
        if g.rank() > 5 {
            return Err(format!("lattice {i} has rank {}", g.rank()));
        }
        let d = random_pseff(&mut rng, &s);
        let dec = decompose(g, &d).map_err(|e| format!("lattice {i}: {e}"))?;
        if dec.positive.add(&negative_class(g, &dec.negative)) != d {
            return Err(format!("lattice {i}: P + N != D"));
        }
        for c in g.curves() {
            let pc = g.intersect(&dec.positive, &c.class).unwrap().coeff(0);
            let in_support = dec.negative.iter().any(|(n, _)| n == &c.name);
            if (in_support && !pc.is_zero()) || pc.is_negative() {
                return Err(format!("lattice {i}: P.{} = {pc}", c.name));
            }
        }
        let support: Vec<_> = dec.negative.iter().map(|(n, _)| &g.curve(n).unwrap().class).collect();
        let gram: Vec<Vec<Rational>> =
            support.iter().map(|a| support.iter().map(|b| g.intersect(a, b).unwrap().coeff(0)).collect()).collect();
        if !negative_definite(&gram) {
            return Err(format!("lattice {i}: support not negative definite"));
        }
        if subset_decompose(g, &d).as_ref() != Some(&dec.negative) {
            return Err(format!("lattice {i}: disagrees with the subset oracle"));
        }
    }
    for i in 0..100 {
        let s = random_surface(&mut rng);
        let g = &s.geom;
        let d = random_pseff(&mut rng, &s);
        let c = random_effective(&mut rng, &s);
        let vol = volume(g, &d).map_err(|e| e.to_string())?;
        if vol != subset_volume(g, &d) {
            return Err(format!("pair {i}: volume disagrees with the oracle"));
        }
        for lam in [rat(1, 3), int(2), rat(7, 2)] {
            if volume(g, &d.scale(&lam)).unwrap() != &lam * &lam * &vol {
                return Err(format!("pair {i}: not homogeneous"));
            }
        }
        match walk(g, &d, &c) {
            Ok(w) => {
                let mut prev = vol.clone();
                for ch in &w.chambers {
                    for v in [ch.v_lo.clone(), (&ch.v_lo + &ch.v_hi) / int(2), ch.v_hi.clone()] {
                        let cur = volume(g, &d.sub(&c.scale(&v))).unwrap();
                        if cur > prev {
                            return Err(format!("pair {i}: volume increases at v = {v}"));
                        }
                        prev = cur;
                    }
                }
            }
            Err(ZariskiError::IrrationalWall(_)) => {}
            Err(e) => return Err(format!("pair {i}: {e}")),
        }
    }

    let mut agreement = Agreement::default();
    for entry in std::fs::read_dir(cases_dir()).unwrap() {
        let case = cases::load_case_file(&entry.unwrap().path()).unwrap();
        for t in run_case(&case).traces {
            check_trace(&t.trace, 1000, 10_000, &mut agreement);
        }
    }
    if agreement.worst > 1e-9 || agreement.skipped_layouts > 0 {
        return Err(format!("quadrature worst {:e}, {} layouts skipped", agreement.worst, agreement.skipped_layouts));
    }

    let p1 = load("beta_p1xp1");
    expect(value(&p1, 0, "beta_curve"), int(0), "beta of a ruling")?;
    expect(value(&p1, 1, "tau_alpha_upper"), rat(1, 2), "alpha bound on P1xP1")?;
    expect(value(&load("alpha_f1"), 0, "tau_alpha_upper"), rat(1, 3), "alpha bound on F1")?;
    Ok(format!(
        "200 decompositions, 100 volume pairs, {} pieces within {:.1e}, beta/alpha values",
        agreement.double_pieces + agreement.single_pieces,
        agreement.worst
    ))
}

fn kflag(args: &[&str], cases: &Path) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_kflag"))
        .args(args)
        .env("KFLAG_CASES", cases)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn cli_contract() -> Check {
    let dir = cases_dir();
    let (code, text1) = kflag(&["verify-all"], &dir);
    if code != 0 {
        return Err(format!("verify-all exited {code}"));
    }
    let (_, text2) = kflag(&["verify-all"], &dir);
    let (_, json1) = kflag(&["verify-all", "--format", "json", "--trace"], &dir);
    let (_, json2) = kflag(&["verify-all", "--format", "json", "--trace"], &dir);
    if text1 != text2 || json1 != json2 {
        return Err("reports differ between runs".into());
    }
    serde_json::from_slice::<serde_json::Value>(&json1).map_err(|e| format!("json report: {e}"))?;

    let mut tampered = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let tmp = tempfile::tempdir().unwrap();
        for other in std::fs::read_dir(&dir).unwrap() {
            let p = other.unwrap().path();
            std::fs::copy(&p, tmp.path().join(p.file_name().unwrap())).unwrap();
        }
        let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
        let old = v["expected"][0]["value"].as_str().unwrap().to_string();
        let bumped = kflag::ratfn::parse_rational(&old).unwrap() + rat(1, 1000);
        v["expected"][0]["value"] = kflag::ratfn::format_rational(&bumped).into();
        std::fs::write(tmp.path().join(path.file_name().unwrap()), serde_json::to_vec_pretty(&v).unwrap()).unwrap();
        let (code, _) = kflag(&["verify-all"], tmp.path());
        if code != 1 {
            return Err(format!("tampering {} gave exit {code}", path.display()));
        }
        tampered += 1;
    }
    Ok(format!("verify-all exits 0; {tampered} single tamperings each exit 1; text and json byte-stable"))
}

fn main() {
    let start = Instant::now();
    let criteria: [Criterion; 4] = [
        ("1 exact-fraction regression", exact_regression),
        ("2 combinator checks", combinators),
        ("3 property suites", properties),
        ("4 CLI contract", cli_contract),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(e) => {
                failed += 1;
                println!("criterion {name}: FAIL ({e})");
            }
        }
    }
    println!("acceptance: {} of 4 pass in {:.1}s", 4 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
