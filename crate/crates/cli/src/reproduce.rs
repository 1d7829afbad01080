//! The worked examples, recomputed.

use crate::{json_line, Failure, Format};
use heegner::halfint::{basis, form};
use heegner::jacobi::{hecke_v, phi};
use heegner::qseries::theta;
use heegner::quadforms::{atkin_lehner, gamma0_classes, gamma0_equivalent, genus_char, Bqf};
use heegner::traces::{self, Status};
use heegner::{Rational, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

#[derive(Serialize, Debug, Clone)]
pub struct Row {
    pub check: String,
    pub p: Option<i64>,
    pub expected: String,
    pub got: String,
    pub status: Status,
}

type Job = Box<dyn Fn(usize) -> Result<String> + Send + Sync>;

fn job(f: impl Fn(usize) -> Result<String> + Send + Sync + 'static) -> Job {
    Box::new(f)
}

fn list(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn coeffs(p: i64, d_max: i64, idx: usize, at: &'static [i64]) -> Job {
    job(move |_| {
        let f = &basis(p, d_max, 140)?[idx];
        let v = at.iter().map(|&n| f.coefficient_a(n).map(|c| c.to_string())).collect::<Result<Vec<_>>>()?;
        Ok(v.join(","))
    })
}

/// Each listed form with the stabilizer order of its enumerated class, then the class count.
fn classes_of(d: i64, p: i64, beta: i64, forms: &'static [(i64, i64, i64)]) -> Job {
    job(move |_| {
        let reps = gamma0_classes(d, p, beta)?;
        let mut v = Vec::new();
        for &(a, b, c) in forms {
            let q = Bqf::new(a, b, c);
            let hit = reps.iter().find(|r| gamma0_equivalent(&r.form, &q, p).ok().flatten().is_some());
            v.push(match hit {
                Some(r) => format!("{q}:{}", r.stab_gamma0),
                None => format!("{q}:missing"),
            });
        }
        v.push(format!("({} classes)", reps.len()));
        Ok(v.join(" "))
    })
}

fn checks() -> Vec<(String, Option<i64>, String, Job)> {
    const AT2: &[i64] = &[1, 4, 8, 9, 12, 16, 17, 20];
    const AT3: &[i64] = &[1, 4, 9, 12, 13, 16, 21];
    let mut v: Vec<(String, Option<i64>, String, Job)> = Vec::new();
    let mut add = |name: &str, p: Option<i64>, expected: String, j: Job| v.push((name.to_string(), p, expected, j));

    add("theta to q^9", None, "1,2,0,0,2,0,0,0,0,2".into(), job(|_| {
        let t = theta(10);
        Ok((0..10).map(|k| t.coeff(k).map(|c| c.to_string())).collect::<Result<Vec<_>>>()?.join(","))
    }));

    add("f_{4,2} coefficients", Some(2), list(&[-52, 272, 2600, -8244, 15300, 71552, -204800, 282880]), coeffs(2, 7, 0, AT2));
    add("f_{7,2} coefficients", Some(2), list(&[-23, -2048, 45056, 252, -516096, 4145152, -1771, -26378240]), coeffs(2, 7, 1, AT2));
    add(
        "classes (16,2,0)",
        Some(2),
        "[4,-4,2]:2 [2,0,2]:1 [4,0,1]:1 (3 classes)".into(),
        classes_of(16, 2, 0, &[(4, -4, 2), (2, 0, 2), (4, 0, 1)]),
    );
    add("[4,-4,2] vs [2,0,2] under Gamma0(2)", Some(2), "inequivalent".into(), job(|_| {
        let e = gamma0_equivalent(&Bqf::new(4, -4, 2), &Bqf::new(2, 0, 2), 2)?;
        Ok(if e.is_some() { "equivalent" } else { "inequivalent" }.into())
    }));
    add("W_2 on [4,-4,2], [2,0,2]", Some(2), "fixes, swaps with [4,0,1]".into(), job(|_| {
        let q1 = Bqf::new(4, -4, 2);
        let fixes = gamma0_equivalent(&atkin_lehner(&q1, 2)?, &q1, 2)?.is_some();
        let swaps = gamma0_equivalent(&atkin_lehner(&Bqf::new(2, 0, 2), 2)?, &Bqf::new(4, 0, 1), 2)?.is_some();
        Ok(format!("{}, {}", if fixes { "fixes" } else { "moves" }, if swaps { "swaps with [4,0,1]" } else { "no swap" }))
    }));
    add("chi_{17,-4} on [18,2,1], [6,-2,3]", Some(2), "1,-1".into(), job(|_| {
        Ok(format!("{},{}", genus_char(&Bqf::new(18, 2, 1), 17, 4)?, genus_char(&Bqf::new(6, -2, 3), 17, 4)?))
    }));
    add("A(17,4), A*(8,7)", Some(2), "-204800,90112".into(), job(|_| {
        Ok(format!("{},{}", form(2, 4, 140)?.coefficient_a(17)?, form(2, 7, 140)?.a_star(8)?))
    }));
    add("B(4,0), B(17,4) for p = 2", Some(2), "-2,204800".into(), job(|_| {
        Ok(format!("{},{}", phi(4, 2, 3)?.coefficient_b(0)?, phi(17, 2, 4)?.coefficient_b(4)?))
    }));
    add("t^(2)(-1), t^(2)(0), t^(2)(4)", Some(2), "-1,2,-52".into(), job(|bits| {
        let v = [-1, 0, 4].iter().map(|&d| traces::trace(2, d, bits).map(|r| r.recognized)).collect::<Result<Vec<_>>>()?;
        Ok(v.join(","))
    }));
    add("twisted trace (2,17,4)", Some(2), "-204800".into(), job(|bits| Ok(traces::twisted_trace(2, 17, 4, bits)?.recognized)));
    add("twisted trace (2,8,7)", Some(2), "90112".into(), job(|bits| Ok(traces::twisted_trace(2, 8, 7, bits)?.recognized)));
    add("phi_{1,1}|V_2 at discriminants -4, -1", Some(2), "2,1".into(), job(|_| {
        let v = hecke_v(&phi(1, 1, 12)?.base, 2)?;
        Ok(format!("{},{}", v.coeff(0, 2)?, v.coeff(0, 1)?))
    }));
    add("phi_{1,1}|V_2 = 2 phi_{4,2} + phi_{1,2}", Some(2), "equal".into(), job(|_| {
        let lhs = hecke_v(&phi(1, 1, 23)?.base, 2)?;
        let rhs = phi(4, 2, 11)?.base.scalar_mul(&Rational::from_integer(2.into())).add(&phi(1, 2, 11)?.base);
        let same = (lhs.n_min().min(rhs.n_min())..11)
            .all(|n| lhs.row(n).cloned().unwrap_or_default() == rhs.row(n).cloned().unwrap_or_default());
        Ok(if same { "equal" } else { "different" }.into())
    }));
    add("product (2,7): log q exponent", Some(2), "-1 ok".into(), job(|bits| {
        let r = traces::verify_borcherds_product(2, 7, None, bits, 12, 1e-25)?;
        Ok(format!("{} {}", r.crosscheck.log_q, status_word(r.status)))
    }));
    add("twisted product (2,8,7): first exponent", Some(2), "90112 ok".into(), job(|bits| {
        let r = traces::verify_twisted_product(2, 8, 7, bits, 4, 1e-25)?;
        Ok(format!("{} {}", r.crosscheck.exponents[0], status_word(r.status)))
    }));

    add("f_{3,3} coefficients", Some(3), list(&[-14, 40, -78, 168, -378, 688, -897]), coeffs(3, 11, 0, AT3));
    add("f_{3,3} at q^52, q^117", Some(3), "133056,-30650256".into(), coeffs(3, 11, 0, &[52, 117]));
    add("f_{8,3} coefficients", Some(3), list(&[-34, -188, 2430, 8262, -11968, -34936, 171072]), coeffs(3, 11, 1, AT3));
    add("f_{11,3} coefficients", Some(3), list(&[22, -552, -11178, 48600, 76175, -269744, -1782891]), coeffs(3, 11, 2, AT3));
    add(
        "classes (39,3,3)",
        Some(3),
        "[12,3,1]:1 [3,3,4]:1 [6,3,2]:1 [15,9,2]:1 (4 classes)".into(),
        classes_of(39, 3, 3, &[(12, 3, 1), (3, 3, 4), (6, 3, 2), (15, 9, 2)]),
    );
    add("B(1,3), B(13,8) for p = 3", Some(3), "14,11968".into(), job(|_| {
        Ok(format!("{},{}", phi(1, 3, 3)?.coefficient_b(3)?, phi(13, 3, 4)?.coefficient_b(8)?))
    }));
    add("t^(3)(3)", Some(3), "-14".into(), job(|bits| Ok(traces::trace(3, 3, bits)?.recognized)));
    add("twisted trace (3,13,3)", Some(3), "-378".into(), job(|bits| Ok(traces::twisted_trace(3, 13, 3, bits)?.recognized)));
    add("twisted trace (3,13,8)", Some(3), "-11968".into(), job(|bits| Ok(traces::twisted_trace(3, 13, 8, bits)?.recognized)));
    add("twisted trace (3,21,8)", Some(3), "342144".into(), job(|bits| Ok(traces::twisted_trace(3, 21, 8, bits)?.recognized)));
    add("Faber trace (3,13,3), m = 1", Some(3), "-378".into(), job(|bits| Ok(traces::twisted_faber_trace(3, 13, 3, 1, bits)?.recognized)));
    add("product (3,3): log q exponent", Some(3), "-1/3 ok".into(), job(|bits| {
        let r = traces::verify_borcherds_product(3, 3, None, bits, 12, 1e-25)?;
        Ok(format!("{} {}", r.crosscheck.log_q, status_word(r.status)))
    }));
    add("twisted product (3,13,3): exponents", Some(3), "-378,133056,-61300512 ok".into(), job(|bits| {
        let r = traces::verify_twisted_product(3, 13, 3, bits, 8, 1e-25)?;
        Ok(format!("{} {}", r.crosscheck.exponents[..3].join(","), status_word(r.status)))
    }));
    v
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Ok => "ok",
        Status::Breach => "breach",
    }
}

/// Runs the checks for `p` (all when `None`), in table order.
pub fn run(p: Option<i64>, bits: usize) -> Vec<Row> {
    let selected: Vec<_> = checks().into_iter().filter(|c| p.is_none() || c.1.is_none() || c.1 == p).collect();
    selected
        .par_iter()
        .map(|(name, cp, expected, f)| {
            let got = f(bits).unwrap_or_else(|e| format!("error: {e}"));
            let status = if &got == expected { Status::Ok } else { Status::Breach };
            Row { check: name.clone(), p: *cp, expected: expected.clone(), got, status }
        })
        .collect()
}

pub fn emit(out: &mut impl Write, format: Format, rows: &[Row]) -> std::result::Result<(), Failure> {
    match format {
        Format::Json => json_line(out, &rows)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Text => {
            let width = rows.iter().map(|r| r.check.len()).max().unwrap_or(0);
            for r in rows {
                writeln!(out, "{:<6} {:<width$}  {}", status_word(r.status).to_uppercase(), r.check, r.got)?;
                if r.status == Status::Breach {
                    writeln!(out, "       {:<width$}  expected {}", "", r.expected)?;
                }
            }
            let passed = rows.iter().filter(|r| r.status == Status::Ok).count();
            writeln!(out, "{passed}/{} passed", rows.len())?;
        }
    }
    Ok(())
}
