//! Acceptance suite: one PASS/FAIL line per criterion.

use heegner::halfint::{basis, check_transformations, form, HalfIntForm};
use heegner::jacobi::{hecke_v, pairing, phi, phi_many, rows_for};
use heegner::numeric::{real_to_f64, BigComplex};
use heegner::qseries::{rankin_cohen, ExactSeries};
use heegner::quadforms::{atkin_lehner, gamma0_classes, gamma0_equivalent, genus_char, reduce, Bqf, Gl2z};
use heegner::traces::{
    check_twisted_inputs, recognize_integer, twisted_trace, twisted_value, verify_borcherds_product,
    verify_twisted_product, Status,
};
use heegner::{BigInt, Error, Rational};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use std::time::{Duration, Instant};

const BITS: usize = 256;
const CASES: u32 = 200;

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(detail: impl Into<String>) -> Outcome {
    Outcome { pass: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { pass: false, detail: detail.into() }
}

fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn within(t: Duration, limit: f64, out: Outcome) -> Outcome {
    let s = t.as_secs_f64();
    if s > limit {
        fail(format!("{} but took {s:.1} s (limit {limit} s)", out.detail))
    } else {
        out
    }
}

fn golden_expansions() -> Outcome {
    let b2 = match basis(2, 7, 140) {
        Ok(b) => b,
        Err(e) => return fail(format!("basis(2,7): {e}")),
    };
    let b3 = match basis(3, 11, 140) {
        Ok(b) => b,
        Err(e) => return fail(format!("basis(3,11): {e}")),
    };
    let at2 = [1, 4, 8, 9, 12, 16, 17, 20];
    let at3 = [1, 4, 9, 12, 13, 16, 21];
    let cases: [(&HalfIntForm, &[i64], &[i64]); 6] = [
        (&b2[0], &at2, &[-52, 272, 2600, -8244, 15300, 71552, -204800, 282880]),
        (&b2[1], &at2, &[-23, -2048, 45056, 252, -516096, 4145152, -1771, -26378240]),
        (&b3[0], &at3, &[-14, 40, -78, 168, -378, 688, -897]),
        (&b3[1], &at3, &[-34, -188, 2430, 8262, -11968, -34936, 171072]),
        (&b3[2], &at3, &[22, -552, -11178, 48600, 76175, -269744, -1782891]),
        (&b3[0], &[52, 117], &[133056, -30650256]),
    ];
    let mut bad = Vec::new();
    for (f, at, want) in cases {
        for (&n, &w) in at.iter().zip(want) {
            if f.coefficient_a(n).ok() != Some(int(w)) {
                bad.push(format!("{} q^{n}", f.label));
            }
        }
    }
    if bad.is_empty() {
        ok("f_{4,2}, f_{7,2}, f_{3,3}, f_{8,3}, f_{11,3} exact at all listed exponents")
    } else {
        fail(format!("mismatches: {}", bad.join(", ")))
    }
}

fn class_sets() -> Outcome {
    let f = Bqf::new;
    let check = |d: i64, p: i64, beta: i64, forms: &[(Bqf, u32)]| -> std::result::Result<(), String> {
        let cl = gamma0_classes(d, p, beta).map_err(|e| e.to_string())?;
        if cl.len() != forms.len() {
            return Err(format!("({d},{p},{beta}): {} classes, expected {}", cl.len(), forms.len()));
        }
        for (q, stab) in forms {
            let hit = cl.iter().find(|c| gamma0_equivalent(&c.form, q, p).ok().flatten().is_some());
            match hit {
                Some(c) if c.stab_gamma0 == *stab => {}
                Some(c) => return Err(format!("{q}: stabilizer {} expected {stab}", c.stab_gamma0)),
                None => return Err(format!("{q} not represented")),
            }
        }
        Ok(())
    };
    let r16 = check(16, 2, 0, &[(f(4, -4, 2), 2), (f(2, 0, 2), 1), (f(4, 0, 1), 1)]);
    let r39 = check(39, 3, 3, &[(f(12, 3, 1), 1), (f(3, 3, 4), 1), (f(6, 3, 2), 1), (f(15, 9, 2), 1)]);
    let beta1 = matches!(gamma0_classes(39, 3, 1), Err(Error::BadBeta { .. }));
    match (r16, r39) {
        (Ok(()), Ok(())) if beta1 => {
            ok("(16,2,0) with stabilizers (2,1,1); (39,3) four forms at beta = 3 (beta = 1 rejected as inadmissible)")
        }
        (a, b) => fail(format!("{a:?} {b:?} beta=1 rejected: {beta1}")),
    }
}

fn twisted_traces() -> Outcome {
    let cases = [(2, 17, 4, -204800), (2, 8, 7, 90112), (3, 13, 3, -378), (3, 13, 8, -11968), (3, 21, 8, 342144)];
    let mut worst = 0f64;
    for (p, big_d, d, want) in cases {
        match twisted_trace(p, big_d, d, BITS) {
            Ok(r) => {
                worst = worst.max(r.residual_f64);
                let good = r.recognized == want.to_string()
                    && r.crosscheck_value == int(want)
                    && r.residual_f64 < 1e-20
                    && r.status == Status::Ok;
                if !good {
                    return fail(format!("({p},{big_d},{d}): {r:?}"));
                }
            }
            Err(e) => return fail(format!("({p},{big_d},{d}): {e}")),
        }
    }
    ok(format!("five values recognized and equal to A*(D,d); max residual {worst:.1e}"))
}

fn duality() -> Outcome {
    let mut pairs = 0;
    for p in [2i64, 3] {
        let fs = match basis(p, 30, 140) {
            Ok(b) => b,
            Err(e) => return fail(format!("basis({p},30): {e}")),
        };
        let ds: Vec<i64> = (1..=30).filter(|&x| heegner::halfint::is_plus_exponent(x, p)).collect();
        let phis = match phi_many(&ds, p, rows_for(30, p)) {
            Ok(v) => v,
            Err(e) => return fail(format!("phi p={p}: {e}")),
        };
        for f in &fs {
            for g in &phis {
                let a = f.coefficient_a(g.big_d);
                let b = g.coefficient_b(f.d);
                match (a, b) {
                    (Ok(a), Ok(b)) if a == -b.clone() => {}
                    (a, b) => return fail(format!("p={p} D={} d={}: A={a:?} B={b:?}", g.big_d, f.d)),
                }
                match pairing(f, g) {
                    Ok(v) if v == int(0) => {}
                    other => return fail(format!("pairing p={p} D={} d={}: {other:?}", g.big_d, f.d)),
                }
                pairs += 1;
            }
        }
    }
    ok(format!("A = -B and zero pairing on {pairs} admissible pairs"))
}

fn hecke_lemma() -> Outcome {
    let win = 11;
    for (big_d, p) in [(1i64, 2i64), (1, 3), (4, 3)] {
        let run = || -> heegner::Result<bool> {
            let lhs = hecke_v(&phi(big_d, 1, win * p + 1)?.base, p)?;
            let rhs = phi(p * p * big_d, p, win)?.base.scalar_mul(&int(p)).add(&phi(big_d, p, win)?.base);
            for n in lhs.n_min().min(rhs.n_min())..win {
                let l = lhs.row(n).cloned().unwrap_or_default();
                let r = rhs.row(n).cloned().unwrap_or_default();
                if l != r {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        match run() {
            Ok(true) => {}
            Ok(false) => return fail(format!("(D,p) = ({big_d},{p}) differs")),
            Err(e) => return fail(format!("(D,p) = ({big_d},{p}): {e}")),
        }
    }
    ok("phi_{D,1}|V_p = p phi_{p^2 D,p} + phi_{D,p} on rows n <= 10 for (1,2), (1,3), (4,3)")
}

fn borcherds() -> Outcome {
    let mut lines = Vec::new();
    for (p, d) in [(2, 7), (3, 3)] {
        match verify_borcherds_product(p, d, None, BITS, 12, 1e-25) {
            Ok(r) if r.status == Status::Ok && r.crosscheck.log_q == r.crosscheck.expected_log_q => {
                lines.push(format!("({p},{d}) residual {} log q {}", r.residual, r.crosscheck.log_q))
            }
            Ok(r) => return fail(format!("({p},{d}): {r:?}")),
            Err(e) => return fail(format!("({p},{d}): {e}")),
        }
    }
    ok(lines.join("; "))
}

fn twisted_product() -> Outcome {
    match verify_twisted_product(3, 13, 3, BITS, 8, 1e-25) {
        Ok(r) if r.status == Status::Ok && r.crosscheck.exponents[..3] == ["-378", "133056", "-61300512"] => {
            ok(format!("(3,13,3) residual {}, exponents -378, 133056, -61300512", r.residual))
        }
        Ok(r) => fail(format!("{r:?}")),
        Err(e) => fail(e.to_string()),
    }
}

fn transformations() -> Outcome {
    let tau = BigComplex::parse("0+3i", BITS).unwrap();
    let mut lines = Vec::new();
    for (p, d) in [(2, 4), (3, 3)] {
        let f = match form(p, d, 140) {
            Ok(f) => f,
            Err(e) => return fail(e.to_string()),
        };
        match check_transformations(&f, &tau, BITS) {
            Ok(r) if r.max_residual < 1e-30 => lines.push(format!("{} max {:.1e}", f.label, r.max_residual)),
            Ok(r) => return fail(format!("{}: {r:?}", f.label)),
            Err(e) => return fail(format!("{}: {e}", f.label)),
        }
    }
    ok(lines.join("; "))
}

fn series_strategy() -> impl Strategy<Value = ExactSeries> {
    (-3i64..4, proptest::collection::vec(-30i64..31, 1..16))
        .prop_map(|(v, c)| ExactSeries::from_i64s(1, v, &c, v + 16))
}

fn definite_form() -> impl Strategy<Value = Bqf> {
    (1i64..60, -80i64..80, 1i64..60).prop_filter_map("definite", |(a, b, c)| {
        let q = Bqf::new(a, b, c);
        (b * b - 4 * a * c < 0).then_some(q)
    })
}

fn gamma0_element(p: i64) -> impl Strategy<Value = Gl2z> {
    (-6i64..7, -4i64..5).prop_filter_map("unimodular", move |(b, cc)| {
        // [[1 + b·p·cc, b], [p·cc, 1]]
        Gl2z::new(1 + b * p * cc, b, p * cc, 1)
    })
}

/// (p, D, d) triples valid for twisted traces with dD ≤ 160.
fn twisted_pool() -> Vec<(i64, i64, i64)> {
    let mut out = Vec::new();
    for p in [2i64, 3] {
        for big_d in 2..=40 {
            for d in 3..=40 {
                if d * big_d <= 160 && check_twisted_inputs(p, big_d, d).is_ok() {
                    out.push((p, big_d, d));
                }
            }
        }
    }
    out
}

fn property_suites() -> Outcome {
    let runner = || TestRunner::new(Config { cases: CASES, failure_persistence: None, ..Config::default() });
    let mut results: Vec<(&str, std::result::Result<(), String>)> = Vec::new();

    let leibniz = runner().run(&(series_strategy(), series_strategy()), |(f, g)| {
        let lhs = f.mul(&g).unwrap().d_operator(1);
        let rhs = f.d_operator(1).mul(&g).unwrap().add(&f.mul(&g.d_operator(1)).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        Ok(())
    });
    results.push(("Leibniz rule", leibniz.map_err(|e| e.to_string())));

    let anti = runner().run(&(series_strategy(), series_strategy(), 1i64..13, 1i64..13, 0u32..5), |(f, g, k2, l2, n)| {
        let k = Rational::new(k2.into(), 2.into());
        let l = Rational::new(l2.into(), 2.into());
        let fg = rankin_cohen(&f, &k, &g, &l, n).unwrap();
        let gf = rankin_cohen(&g, &l, &f, &k, n).unwrap();
        let sign = if n % 2 == 0 { 1 } else { -1 };
        prop_assert_eq!(fg, gf.scalar_mul_int(sign));
        Ok(())
    });
    results.push(("bracket antisymmetry", anti.map_err(|e| e.to_string())));

    let u_comp = runner().run(&(series_strategy(), 1u32..6, 1u32..6), |(f, m, n)| {
        prop_assert_eq!(f.hecke_u(m).hecke_u(n), f.hecke_u(m * n));
        Ok(())
    });
    results.push(("U_m composition", u_comp.map_err(|e| e.to_string())));

    let red = runner().run(&definite_form(), |q| {
        let (r, g) = reduce(&q).unwrap();
        prop_assert!(r.is_reduced());
        prop_assert_eq!(q.act(&g), r);
        prop_assert_eq!(reduce(&r).unwrap().0, r);
        Ok(())
    });
    results.push(("reduction idempotence", red.map_err(|e| e.to_string())));

    let pool = twisted_pool();
    let classes: Vec<(i64, i64, i64, Vec<Bqf>)> = pool
        .iter()
        .map(|&(p, big_d, d)| {
            let beta = heegner::quadforms::default_beta(d * big_d, p).unwrap();
            let cl = gamma0_classes(d * big_d, p, beta).unwrap().into_iter().map(|c| c.form).collect();
            (p, big_d, d, cl)
        })
        .collect();
    let chi = runner().run(&(0..classes.len(), 0usize..64, gamma0_element(2), gamma0_element(3)), |(i, j, g2, g3)| {
        let (p, big_d, d, cl) = &classes[i];
        let q = cl[j % cl.len()];
        let c = genus_char(&q, *big_d, *d).unwrap();
        let w = atkin_lehner(&q, *p).unwrap();
        prop_assert_eq!(genus_char(&w, *big_d, *d).unwrap(), c);
        let g = if *p == 2 { g2 } else { g3 };
        prop_assert_eq!(genus_char(&q.act(&g), *big_d, *d).unwrap(), c);
        Ok(())
    });
    results.push(("chi W_p-invariance", chi.map_err(|e| e.to_string())));

    let bits = 160;
    let beta_ind = runner().run(&(0..pool.len()), |i| {
        let (p, big_d, d) = pool[i];
        let (b, x) = twisted_value(p, big_d, d, None, bits, 1).unwrap();
        let (_, y) = twisted_value(p, big_d, d, Some((2 * p - b) % (2 * p)), bits, 1).unwrap();
        let diff = real_to_f64(&x.sub(&y).abs());
        let scale = real_to_f64(&x.abs()).max(1.0);
        prop_assert!(diff / scale < 1e-30, "({}, {}, {}): {}", p, big_d, d, diff);
        Ok(())
    });
    results.push(("beta-independence", beta_ind.map_err(|e| e.to_string())));

    let integral = runner().run(&(0..pool.len(), 1u32..3), |(i, m)| {
        let (p, big_d, d) = pool[i];
        let (_, x) = twisted_value(p, big_d, d, None, bits, m).unwrap();
        prop_assert!(recognize_integer(&x, 1e-20).is_ok(), "({}, {}, {}, m = {}): {}", p, big_d, d, m, x.to_string_digits(30));
        Ok(())
    });
    results.push(("twisted integrality", integral.map_err(|e| e.to_string())));

    let failed: Vec<String> =
        results.iter().filter_map(|(n, r)| r.as_ref().err().map(|e| format!("{n}: {e}"))).collect();
    if failed.is_empty() {
        let names: Vec<&str> = results.iter().map(|(n, _)| *n).collect();
        ok(format!("{} suites x {CASES} cases ({})", results.len(), names.join(", ")))
    } else {
        fail(failed.join("; "))
    }
}

fn main() {
    type Criterion = (u32, &'static str, Option<f64>, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        (1, "golden expansions", Some(60.0), golden_expansions),
        (2, "class enumeration", None, class_sets),
        (3, "twisted traces", Some(120.0), twisted_traces),
        (4, "duality and pairing", None, duality),
        (5, "Hecke V_p lemma", None, hecke_lemma),
        (6, "Borcherds product", None, borcherds),
        (7, "twisted product", None, twisted_product),
        (8, "transformation laws", None, transformations),
        (9, "property suites", Some(120.0), property_suites),
    ];
    let mut failures = Vec::new();
    for (id, name, limit, run) in criteria {
        let t0 = Instant::now();
        let out = run();
        let el = t0.elapsed();
        let out = match limit {
            Some(l) => within(el, l, out),
            None => out,
        };
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {id} {tag} [{name}] ({:.1} s): {}", el.as_secs_f64(), out.detail);
        if !out.pass {
            failures.push(id);
        }
    }
    if failures.is_empty() {
        println!("acceptance: all 9 criteria passed");
    } else {
        println!("acceptance: failed criteria {failures:?}");
        std::process::exit(1);
    }
}
