//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use bds_core::analysis::{self, Intervals, MomentKind};
use bds_core::basis;
use bds_core::exact::{self, int, rat, Rational};
use bds_core::functions::{registry, FunctionSpec};
use bds_core::moments;
use bds_core::operator;
use bds_core::{QuadratureConfig, Result, ShapeParams};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn pow2_grid(lo: u32, hi: u32) -> Vec<Rational> {
    (lo..=hi).map(|e| int(1 << e)).collect()
}

const GAMMAS: [(i64, i64); 3] = [(1, 2), (1, 1), (2, 1)];

fn kernel_normalization() -> Result<Outcome> {
    let one = registry("one")?;
    let xs = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0];
    let mut worst: f64 = 0.0;
    for n in [8, 32, 128] {
        for (gn, gd) in GAMMAS {
            for (a, b) in [(0, 0), (1, 2)] {
                let p = ShapeParams::from_ints(n, gn, gd, a, b)?;
                for r in operator::apply_grid(&p, &one, &xs, &cfg())? {
                    worst = worst.max((r.value - 1.0).abs());
                }
            }
        }
    }
    outcome(worst <= 1e-12, format!("max |B(1,x) - 1| = {worst:.2e} over 108 cells (tol 1e-12)"))
}

fn moment_matrix() -> Result<Vec<ShapeParams>> {
    let mut cells = Vec::new();
    for n in [8, 16, 64] {
        for (gn, gd) in GAMMAS {
            for (a, b) in [(0, 0), (1, 2), (2, 2)] {
                cells.push(ShapeParams::from_ints(n, gn, gd, a, b)?);
            }
        }
    }
    Ok(cells)
}

/// Highest moment order that exists: `m < n/γ + 1`.
fn existing_order(p: &ShapeParams, cap: usize) -> usize {
    (0..=cap)
        .take_while(|&m| Rational::from_integer(m.into()) < p.shape() + Rational::from_integer(1.into()))
        .last()
        .unwrap_or(0)
}

fn dual_path() -> Result<Outcome> {
    let mut equal = 0;
    let mut capped = Vec::new();
    let cells = moment_matrix()?;
    for p in &cells {
        let m = existing_order(p, 6);
        if m < 6 {
            capped.push(format!("{p}: m ≤ {m}"));
        }
        let rec = moments::central_moments(p, m);
        rec.require_complete()?;
        let raw = moments::raw_moments(p, m)?;
        if moments::central_from_raw(&raw, m)? == rec.central {
            equal += 1;
        }
    }
    let note = if capped.is_empty() {
        String::new()
    } else {
        format!("; moments beyond n/γ + 1 do not exist for {}", capped.join(", "))
    };
    outcome(
        equal == cells.len(),
        format!("{equal}/{} cells exactly equal for m ≤ 6{note}", cells.len()),
    )
}

fn first_moment() -> Result<Outcome> {
    let cells = moment_matrix()?;
    let mut ok = 0;
    for p in &cells {
        let nb = p.n() + p.beta();
        let want = bds_core::RationalPoly::new(vec![p.alpha() / &nb, -(p.beta() / &nb)]);
        if moments::central_moments(p, 1).central[1] == want {
            ok += 1;
        }
    }
    outcome(ok == cells.len(), format!("{ok}/{} cells: μ_1 = (α - βx)/(n + β) exactly", cells.len()))
}

fn quadrature_vs_exact() -> Result<Outcome> {
    let xs: Vec<f64> = (1..=20).map(|i| 0.25 * i as f64).collect();
    let mut worst: f64 = 0.0;
    let mut cells = 0;
    for n in [16, 64] {
        for (gn, gd) in GAMMAS {
            for (a, b) in [(0, 0), (1, 2)] {
                let p = ShapeParams::from_ints(n, gn, gd, a, b)?;
                let raw = moments::raw_moments(&p, 4)?;
                for (m, poly) in raw.iter().enumerate() {
                    let f = FunctionSpec::monomial(m);
                    for (x, r) in xs.iter().zip(operator::apply_grid(&p, &f, &xs, &cfg())?) {
                        let want = poly.eval_f64(*x);
                        worst = worst.max((r.value - want).abs() / want.abs());
                    }
                    cells += 1;
                }
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("max rel err {worst:.2e} over {cells} (params, m) cells × 20 points (tol 1e-9)"),
    )
}

fn voronovskaja_zero() -> Result<Outcome> {
    let t2 = registry("t2")?;
    let grid = pow2_grid(6, 14);
    let base = ShapeParams::from_ints(64, 1, 1, 0, 0)?;
    let rep = analysis::voronovskaja_check(&base, &grid, &t2, 0, 1.0, &cfg())?;
    // exact oracle 2n x(1+x)/(n-1) at x = 1
    let oracle_gap = rep
        .param_grid
        .iter()
        .zip(&rep.observed)
        .map(|(n, v)| (v - 4.0 * n / (n - 1.0)).abs())
        .fold(0.0, f64::max);
    let first = (rep.extrapolated_limit - 4.0).abs() / 4.0;

    let shifted = ShapeParams::from_ints(64, 1, 1, 1, 2)?;
    let rep2 = analysis::voronovskaja_check(&shifted, &grid, &t2, 0, 1.0, &cfg())?;
    let pass = first <= 0.005 && rep2.rel_deviation <= 0.01;
    outcome(
        pass,
        format!(
            "α=β=0: limit {:.6} vs 4 (rel {first:.1e}, tol 5e-3; max gap to exact sequence {oracle_gap:.1e}); \
             (α,β)=(1,2): limit {:.6} vs {:.6} (rel {:.1e}, tol 1e-2)",
            rep.extrapolated_limit, rep2.extrapolated_limit, rep2.target, rep2.rel_deviation
        ),
    )
}

fn five_point(values: &[f64], h: f64, r: usize) -> f64 {
    let [m2, m1, c, p1, p2] = [values[0], values[1], values[2], values[3], values[4]];
    match r {
        1 => (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h),
        _ => (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h),
    }
}

fn simultaneous() -> Result<Outcome> {
    let h = 1e-2;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (gn, gd) in GAMMAS {
        let p = ShapeParams::from_ints(64, gn, gd, 1, 2)?;
        for id in ["t2", "t3", "exp_neg"] {
            let f = registry(id)?;
            for x in [0.5, 1.0, 2.0] {
                let stencil: Vec<f64> = (-2..=2).map(|i| x + i as f64 * h).collect();
                let vals: Vec<f64> = operator::apply_grid(&p, &f, &stencil, &cfg())?
                    .iter()
                    .map(|r| r.value)
                    .collect();
                for r in [1, 2] {
                    let d = operator::apply_derivative(&p, &f, r, x, &cfg())?.value;
                    let fd = five_point(&vals, h, r);
                    worst = worst.max((d - fd).abs() / d.abs().max(1e-300));
                    count += 1;
                }
            }
        }
    }
    outcome(
        worst <= 1e-5,
        format!("max rel gap {worst:.2e} over {count} (γ, f, x, r) cells at n = 64 (tol 1e-5)"),
    )
}

fn voronovskaja_derivative() -> Result<Outcome> {
    let t3 = registry("t3")?;
    let base = ShapeParams::from_ints(64, 1, 1, 1, 2)?;
    let rep = analysis::voronovskaja_check(&base, &pow2_grid(6, 14), &t3, 1, 1.0, &cfg())?;
    // classical coefficient of f^{(r+1)} at α = β = 0, r = 1, γ = 2, x = 1
    let guard_params = ShapeParams::from_ints(64, 2, 1, 0, 0)?;
    let half_square = FunctionSpec::polynomial("t2/2", vec![0.0, 0.0, 0.5]);
    let coefficient = analysis::voronovskaja_rhs(&guard_params, &half_square, 1, 1.0)?;
    let pass = rep.rel_deviation <= 0.02 && coefficient == 6.0;
    outcome(
        pass,
        format!(
            "limit {:.6} vs {:.6} (rel {:.1e}, tol 2e-2); γ=2 coefficient guard: {coefficient} (want 6)",
            rep.extrapolated_limit, rep.target, rep.rel_deviation
        ),
    )
}

fn moment_orders() -> Result<Outcome> {
    let p = ShapeParams::from_ints(64, 1, 1, 1, 2)?;
    let grid = pow2_grid(6, 14);
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in [MomentKind::Central, MomentKind::Basis] {
        for (m, want) in [(2, -1.0), (3, -2.0), (4, -2.0)] {
            let fit = analysis::moment_order_fit(&p, kind, m, &int(1), &grid)?;
            let ok = (fit.slope - want).abs() <= 0.15 && fit.dropped.is_empty();
            pass &= ok;
            let tag = if kind == MomentKind::Central { "μ" } else { "U" };
            parts.push(format!("{tag}_{m} {:.3}", fit.slope));
        }
    }
    outcome(pass, format!("slopes {} (targets -1, -2, -2; tol 0.15)", parts.join(", ")))
}

fn random_rational(rng: &mut ChaCha8Rng, max_num: i64, max_den: i64) -> Rational {
    rat(rng.random_range(1..=max_num), rng.random_range(1..=max_den))
}

fn q_identity() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut ok = 0;
    let mut structural = true;
    let tuples = 20;
    for _ in 0..tuples {
        let gamma = random_rational(&mut rng, 7, 5);
        // integral n/γ keeps p itself rational
        let n = &gamma * int(rng.random_range(1..=40));
        let k: u64 = rng.random_range(0..=30);
        let x = random_rational(&mut rng, 9, 7);
        let p = ShapeParams::new(n.clone(), gamma.clone(), Rational::zero(), Rational::zero())?;
        let weight = basis::p_exact(&p, k, &x)?;
        let a = &x * (int(1) + &gamma * &x);
        let mut all = true;
        for r in 0..=4 {
            let table = basis::q_decomposition(&basis::s_polynomials(r, &gamma), r)?;
            structural &= table.keys().all(|&(i, j)| 2 * i + j <= r);
            let lhs = exact::pow(&a, r) * basis::dr_p_exact(&p, k, r, &x)?;
            let rhs = basis::eval_q_table(&table, &n, &Rational::from_integer(k.into()), &x) * &weight;
            all &= lhs == rhs;
        }
        if all {
            ok += 1;
        }
    }
    outcome(
        ok == tuples && structural,
        format!("{ok}/{tuples} random (n, γ, k, x) tuples exact for r ≤ 4; support 2i + j ≤ r: {structural}"),
    )
}

fn error_bound() -> Result<Outcome> {
    let iv = Intervals {
        a: 0.2,
        b: 3.0,
        a1: 0.5,
        b1: 2.0,
    };
    let base = ShapeParams::from_ints(64, 1, 1, 1, 2)?;
    let grid = pow2_grid(6, 12);
    let mut pass = true;
    let mut parts = Vec::new();
    for id in ["t2", "sin"] {
        let f = registry(id)?;
        for r in [0, 1] {
            let rep = analysis::error_bound_ratio(&base, &grid, &f, r, iv, &cfg())?;
            let last = rep.rows.last().expect("grid").ratio;
            let last_outer = rep.rows.last().expect("grid").ratio_outer;
            pass &= rep.passed;
            parts.push(format!(
                "{id} r={r}: last {last:.3} / median {:.3} (outer-interval last {last_outer:.3})",
                rep.median_ratio
            ));
        }
    }
    outcome(pass, format!("{} (need last ≤ 2 × median)", parts.join("; ")))
}

/// Not a criterion: where the classical closed form and the moments disagree.
fn coefficient_note() -> Result<String> {
    let p = ShapeParams::from_ints(64, 2, 1, 0, 0)?;
    let half_square = FunctionSpec::polynomial("t2/2", vec![0.0, 0.0, 0.5]);
    let from_moments = analysis::voronovskaja_limit(&p, &half_square, 1, 1.0)?;
    let coeffs = [int(0), int(0), rat(1, 2)];
    let exact = analysis::exact_voronovskaja_term(&p.with_n(int(1 << 16))?, &coeffs, 1, &int(1))?;
    Ok(format!(
        "note: at γ=2 the moment-derived coefficient is {from_moments} and the exact term at n = 2^16 is {:.5}; \
         the classical form r·γ·(1+2x) agrees with the moments only for γ = 1",
        exact::to_f64(&exact)
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 10] = [
        ("kernel normalization", kernel_normalization),
        ("dual-path exact moments", dual_path),
        ("first central moment identity", first_moment),
        ("quadrature vs exact raw moments", quadrature_vs_exact),
        ("limit of n(B f - f), r = 0", voronovskaja_zero),
        ("derivative formula vs finite differences", simultaneous),
        ("limit for derivatives, r = 1", voronovskaja_derivative),
        ("moment orders", moment_orders),
        ("Q-polynomial identity", q_identity),
        ("error bound ratio boundedness", error_bound),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2}. {name}: {detail} ({:.1}s)", i + 1, t.elapsed().as_secs_f64());
    }
    match coefficient_note() {
        Ok(line) => println!("{line}"),
        Err(e) => println!("note: coefficient diagnostic failed: {e}"),
    }
    println!(
        "acceptance: {} passed, {failures} failed in {:.1}s",
        criteria.len() - failures,
        start.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
