use hardy_core::ensemble::{random_dirichlet, random_polytorus, PolyShape};
use hardy_core::json::num;
use hardy_core::littlewood_paley::{decompose, martingale_blocks, random_sign_symbol, IntervalPartition};
use hardy_core::multipliers::{apply_multiplier, SymbolRegistry};
use hardy_core::norms::{norm_even_exact, norm_ergodic, norm_grid, norm_parseval, NormConfig, NormMethod, Parseval};
use hardy_core::numeric::{rel_diff, rng_stream};
use hardy_core::projections::schauder_identity_check;
use hardy_core::transference::{approx_logs, build_matrix_a, build_matrix_b, change_variables};
use hardy_core::{bohr_lift, kronecker_flow, ReducedRational, Result};
use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Value};

use crate::reports;

const DIRICHLET_FIXTURE: &str = include_str!("../../../fixtures/dirichlet_1_2.json");
const POLYTORUS_FIXTURE: &str = include_str!("../../../fixtures/polytorus_d2.json");

pub struct Report {
    pub lines: Vec<String>,
    pub json: Value,
    pub pass: bool,
    /// `(file name, contents)` pairs.
    pub artifacts: Vec<(String, String)>,
}

struct Suite {
    seed: u64,
    entries: Vec<(String, bool, Value)>,
}

impl Suite {
    fn check(&mut self, name: &str, f: impl FnOnce(u64) -> Result<(bool, Value)>) {
        let stream = self.entries.len() as u64;
        let seed = rng_stream(self.seed, 0x5e1f_7e57 + stream).gen::<u64>();
        let (pass, detail) = match f(seed) {
            Ok(r) => r,
            Err(e) => (false, json!({"error": e.code(), "message": e.to_string()})),
        };
        self.entries.push((name.to_string(), pass, detail));
    }
}

fn shape(dims: u32, max_degree: i64, terms: usize) -> PolyShape {
    PolyShape {
        dims,
        max_degree,
        terms,
        analytic: true,
    }
}

pub fn run(seed: u64) -> Result<Report> {
    let mut s = Suite {
        seed,
        entries: Vec::new(),
    };
    let cfg = NormConfig {
        seed,
        ..NormConfig::default()
    };

    s.check("bohr_correspondence", |seed| {
        let mut rng = rng_stream(seed, 0);
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let n = rng.gen_range(1..=200);
            let f = random_dirichlet(&mut rng, n);
            let g = bohr_lift(&f)?;
            for _ in 0..3 {
                let t = rng.gen_range(-50.0..50.0);
                let a = g.eval(&kronecker_flow(t, g.dimension().max(1))?)?;
                let b = f.eval(Complex64::new(0.0, t));
                worst = worst.max((a - b).norm() / b.norm().max(1e-300));
            }
        }
        Ok((worst <= 1e-12, json!({"max_rel_error": num(worst)})))
    });

    s.check("grid_matches_exact_oracles", |seed| {
        let mut rng = rng_stream(seed, 0);
        let mut worst2: f64 = 0.0;
        let mut worst4: f64 = 0.0;
        for _ in 0..5 {
            let f = random_polytorus(&mut rng, &shape(3, 4, 8));
            worst2 = worst2.max(rel_diff(norm_grid(&f, 2.0, &cfg)?.value, norm_parseval(&f).value));
            worst4 = worst4.max(rel_diff(norm_grid(&f, 4.0, &cfg)?.value, norm_even_exact(&f, 2)?.value));
        }
        Ok((worst2 <= 1e-8 && worst4 <= 1e-6, json!({"p2": num(worst2), "p4": num(worst4)})))
    });

    s.check("ergodic_trace_converges", |seed| {
        let mut rng = rng_stream(seed, 0);
        let f = bohr_lift(&random_dirichlet(&mut rng, 8))?;
        let est = norm_ergodic(&[f.clone()], 2.0, &cfg)?;
        let exact = norm_parseval(&f).value;
        let err = rel_diff(est.value, exact);
        Ok((err <= 0.05, json!({"final_rel_error": num(err)})))
    });

    s.check("littlewood_paley_p2_isometry", |seed| {
        let mut rng = rng_stream(seed, 0);
        let mut worst: f64 = 0.0;
        let mut reassembled = true;
        for eta in ["3/2", "2", "3"] {
            let part = IntervalPartition::new(ReducedRational::parse(eta)?)?;
            for _ in 0..5 {
                let f = random_polytorus(&mut rng, &shape(3, 3, 8));
                let d = decompose(&f, &part)?;
                reassembled &= d.reassemble() == f;
                let sq = Parseval.square_norm(&d.parts(), 2.0, &cfg)?.value;
                worst = worst.max(rel_diff(sq, norm_parseval(&f).value));
            }
        }
        Ok((worst <= 1e-10 && reassembled, json!({"max_rel_error": num(worst), "reassembled": reassembled})))
    });

    s.check("random_signs_involution", |seed| {
        let mut rng = rng_stream(seed, 0);
        let part = IntervalPartition::new(ReducedRational::integer(2)?)?;
        let mut ok = true;
        for i in 0..5 {
            let f = random_polytorus(&mut rng, &shape(3, 3, 8));
            let m = random_sign_symbol(&part, seed ^ i);
            let twice = apply_multiplier(&m, &apply_multiplier(&m, &f)?)?;
            ok &= twice == f;
            ok &= rel_diff(norm_parseval(&apply_multiplier(&m, &f)?).value, norm_parseval(&f).value) <= 1e-12;
        }
        Ok((ok, json!({})))
    });

    s.check("transference_construction", |seed| {
        let r = approx_logs(2, 10)?;
        let a = build_matrix_a(&r)?;
        let b = build_matrix_b(1.0, 3, 0.3, 1000)?;
        let mut rng = rng_stream(seed, 0);
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let f = random_polytorus(&mut rng, &shape(2, 3, 6));
            let g = change_variables(&f, &a)?;
            worst = worst.max(rel_diff(norm_parseval(&g).value, norm_parseval(&f).value));
        }
        let pass = r.q == 10 && r.a == [7, 11] && a.determinant()? == 1 && b.matrix.determinant()? == 1 && worst == 0.0;
        Ok((pass, json!({"Q": r.q, "a": r.a, "parseval_rel_change": num(worst)})))
    });

    s.check("schauder_identity", |seed| {
        let mut rng = rng_stream(seed, 0);
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let n = rng.gen_range(1..=120);
            let f = random_dirichlet(&mut rng, n);
            for n in [1, 2, 7, 30, 64, 120] {
                worst = worst.max(schauder_identity_check(&f, n)?.deviation);
            }
        }
        Ok((worst == 0.0, json!({"max_deviation": num(worst)})))
    });

    let mut bench_csv = String::new();
    s.check("truncation_bench_p2", |_| {
        let b = reports::proj_bench(2.0, &[1, 3, 10, 30, 100], 6, None, "auto", &cfg)?;
        bench_csv = b.to_csv();
        let worst = b.rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
        Ok((worst <= 1.0 + 1e-12, json!({"max_ratio": num(worst)})))
    });

    s.check("martingale_blocks", |seed| {
        let mut rng = rng_stream(seed, 0);
        let mut ok = true;
        for _ in 0..5 {
            let f = random_polytorus(&mut rng, &shape(4, 2, 10));
            let blocks = martingale_blocks(&f);
            let sum = blocks.iter().fold(hardy_core::PolytorusPolynomial::zero(), |a, b| a.add(b));
            ok &= sum == f;
            ok &= rel_diff(Parseval.square_norm(&blocks, 2.0, &cfg)?.value, norm_parseval(&f).value) <= 1e-10;
        }
        Ok((ok, json!({})))
    });

    let dirichlet = reports::parse_polynomial(DIRICHLET_FIXTURE)?;
    let polytorus = reports::parse_polynomial(POLYTORUS_FIXTURE)?;

    s.check("fixture_norm_parseval", |_| {
        let v = reports::norm_report(&dirichlet, 2.0, "parseval", &cfg)?;
        let x = v["value"].as_f64().unwrap_or(f64::NAN);
        Ok(((x - 5f64.sqrt()).abs() <= 1e-15, json!({"value": num(x)})))
    });

    s.check("fixture_lp_ratio", |_| {
        let mut worst: f64 = 0.0;
        for f in [&dirichlet, &polytorus] {
            let out = reports::lp_report(f, "2", 2.0, "auto", 0, &cfg)?;
            worst = worst.max((out.report["ratio"].as_f64().unwrap_or(f64::NAN) - 1.0).abs());
        }
        Ok((worst <= 1e-10, json!({"max_deviation": num(worst)})))
    });

    s.check("fixture_transfer_forward", |_| {
        let one = SymbolRegistry::default().parse_str(r#"{"kind":"constant","value":1}"#)?;
        let args = reports::TransferArgs {
            forward: true,
            p: 2.0,
            epsilon: 0.05,
            delta: 0.1,
            gamma: 1.0,
            q_max: 10,
            method: "auto",
        };
        let r = reports::transfer_report(one.as_ref(), &polytorus, &args, &cfg)?;
        let approx = r.approximation.clone().expect("forward report");
        let pass = r.pass && approx.q == 10 && approx.a == [7, 11];
        Ok((pass, json!({"Q": approx.q, "a": approx.a, "report_pass": r.pass})))
    });

    let pass = s.entries.iter().all(|e| e.1);
    let lines = s
        .entries
        .iter()
        .map(|(n, p, _)| format!("{} {n}", if *p { "PASS" } else { "FAIL" }))
        .collect();
    let json = json!({
        "seed": seed,
        "pass": pass,
        "invariants": s.entries.iter().map(|(n, p, d)| json!({"name": n, "pass": p, "detail": d})).collect::<Vec<_>>(),
    });
    Ok(Report {
        lines,
        json,
        pass,
        artifacts: vec![("truncation_bench_p2.csv".into(), bench_csv)],
    })
}
