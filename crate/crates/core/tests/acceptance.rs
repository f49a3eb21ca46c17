//! End-to-end acceptance checks.
//!
//! Criteria 1 and 10 run with the default test command. The adaptation
//! studies (2-9) take minutes each and are marked `#[ignore]`; run them with
//! `cargo test -p dpg-adapt --test acceptance -- --ignored`.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use dpg_adapt::anisotropy::{
    direction_stats, error_density_poly, minimize, objective, HomogeneousComponent, BETA_MAX,
    RHO_MAX,
};
use dpg_adapt::assembly::{Discretization, Problem, SpaceSpec, TestNorm};
use dpg_adapt::basis::ElementBasis;
use dpg_adapt::cases::{case, CaseParams, TestCase};
use dpg_adapt::continuous::{abar, equidistributed_error, optimal_density, predicted_error, ALPHA};
use dpg_adapt::mesh::{unit_square, Triangulation};
use dpg_adapt::metric::{implied_metric, signed_area, FnMetric, Metric, MetricDecomposition};
use dpg_adapt::poly::Poly2;
use dpg_adapt::remesh::{remesh_with, RemeshConfig};
use dpg_adapt::solve::{assemble, field_errors, ElementBlock, SolverKind};
use dpg_adapt::study::{
    adapt_loop, grading_fit, loglog_fit, rate_fit, AdaptSettings, Mode, StudyRecord,
};

fn report(id: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "criterion {id:>2}: {verdict}  {detail}");
}

fn perturbed_square(n: usize, amp: f64, phase: [f64; 2]) -> Triangulation {
    let m = unit_square(n).unwrap();
    let h = 1.0 / n as f64;
    let verts: Vec<[f64; 2]> = m
        .vertices()
        .iter()
        .map(|p| {
            let inside = p.iter().all(|c| *c > 1e-12 && *c < 1.0 - 1e-12);
            if !inside {
                return *p;
            }
            let dx = (17.0 * p[0] + 9.0 * p[1] + phase[0]).sin();
            let dy = (7.0 * p[0] - 13.0 * p[1] + phase[1]).cos();
            [p[0] + amp * h * dx, p[1] + amp * h * dy]
        })
        .collect();
    Triangulation::new(verts, m.triangles().to_vec(), &m.boundary_tags()).unwrap()
}

fn run(
    name: &str,
    p: usize,
    mode: Mode,
    configure: impl FnOnce(&mut AdaptSettings),
) -> StudyRecord {
    let tc: TestCase = case(name, &CaseParams::default()).unwrap();
    let mut settings = AdaptSettings::new(SpaceSpec::new(p, 2, TestNorm::Scaled).unwrap());
    settings.mode = mode;
    settings.cycles = 15;
    settings.complexity = 32.0;
    configure(&mut settings);
    let initial = tc.domain.initial_mesh(4).unwrap();
    adapt_loop(&tc, initial, &settings).unwrap().record
}

fn fixed_cost(name: &str, p: usize, mode: Mode, cycles: usize) -> StudyRecord {
    let tc = case(name, &CaseParams::default()).unwrap();
    let mut settings = AdaptSettings::new(SpaceSpec::new(p, 2, TestNorm::Scaled).unwrap());
    settings.mode = mode;
    settings.cycles = cycles;
    settings.complexity = 512.0;
    settings.growth = 1.0;
    adapt_loop(&tc, unit_square(16).unwrap(), &settings)
        .unwrap()
        .record
}

fn boundary_layer_runs() -> &'static [StudyRecord] {
    static RUNS: OnceLock<Vec<StudyRecord>> = OnceLock::new();
    RUNS.get_or_init(|| {
        (1..=3)
            .map(|p| run("boundary-layer", p, Mode::Solution, |_| {}))
            .collect()
    })
}

fn non_monotone_steps(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] > w[0]).count()
}

// ---------------------------------------------------------------------------
// 1. polynomial exactness

/// Random `u ∈ P^p` as coefficients of `x^a y^b`, `a + b <= p`.
fn poly_strategy(p: usize) -> impl Strategy<Value = Vec<f64>> {
    let n = (p + 1) * (p + 2) / 2;
    prop::collection::vec(-1.0..1.0f64, n)
}

fn monomials(p: usize) -> Vec<(i32, i32)> {
    (0..=p as i32)
        .flat_map(|d| (0..=d).map(move |a| (a, d - a)))
        .collect()
}

fn eval_terms(terms: &[(i32, i32, f64)], x: [f64; 2]) -> f64 {
    terms
        .iter()
        .map(|&(a, b, c)| {
            if a < 0 || b < 0 {
                0.0
            } else {
                c * x[0].powi(a) * x[1].powi(b)
            }
        })
        .sum()
}

#[test]
fn criterion_01_polynomial_exactness() {
    let worst = std::cell::Cell::new((0.0f64, 0.0f64));
    let mut runner = TestRunner::new(Config {
        cases: 6,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (1usize..=3).prop_flat_map(|p| {
        (
            Just(p),
            poly_strategy(p),
            2usize..5,
            0.0..0.3f64,
            -3.0..3.0f64,
            -3.0..3.0f64,
        )
    });
    let result = runner.run(&strategy, |(p, coeffs, n, amp, ph0, ph1)| {
        let mesh = perturbed_square(n, amp, [ph0, ph1]);
        let mons = monomials(p);
        let u_terms: Vec<(i32, i32, f64)> = mons
            .iter()
            .zip(&coeffs)
            .map(|(&(a, b), &c)| (a, b, c))
            .collect();
        let mut lap = Vec::new();
        let mut gx = Vec::new();
        let mut gy = Vec::new();
        for &(a, b, c) in &u_terms {
            lap.push((a - 2, b, c * (a * (a - 1)) as f64));
            lap.push((a, b - 2, c * (b * (b - 1)) as f64));
            gx.push((a - 1, b, c * a as f64));
            gy.push((a, b - 1, c * b as f64));
        }
        let u = {
            let t = u_terms.clone();
            move |x: [f64; 2]| eval_terms(&t, x)
        };
        let source = move |x: [f64; 2]| -eval_terms(&lap, x);
        let grad = move |x: [f64; 2]| [eval_terms(&gx, x), eval_terms(&gy, x)];
        let problem = Problem::poisson(1.0, Arc::new(source), Arc::new(u.clone())).unwrap();
        let disc = Discretization::new(SpaceSpec::new(p, 2, TestNorm::Scaled).unwrap()).unwrap();
        let mut sys = assemble(&mesh, &problem, &disc).unwrap();
        let x = sys.solve(SolverKind::Normal).unwrap();
        let (eu, _) = field_errors(&mesh, &disc, &x, &u, &grad, 0.0);
        let eta = sys
            .error_representation(&x)
            .eta
            .into_iter()
            .fold(0.0, f64::max);
        let w = worst.get();
        worst.set((w.0.max(eu), w.1.max(eta)));
        prop_assert!(
            eu < 1e-9 && eta < 1e-9,
            "p={p} n={n}: |u-u_h| = {eu:e}, max eta = {eta:e}"
        );
        Ok(())
    });
    let w = worst.get();
    report(
        1,
        result.is_ok(),
        &format!("max L2 error {:.2e}, max eta_K {:.2e}", w.0, w.1),
    );
    result.unwrap();
}

// ---------------------------------------------------------------------------
// 2. boundary-layer convergence rates

#[test]
#[ignore = "nightly adaptation study"]
fn criterion_02_boundary_layer_rates() {
    let mut pass = true;
    let mut detail = Vec::new();
    for (i, rec) in boundary_layer_runs().iter().enumerate() {
        let p = i + 1;
        let (slope, _) = rate_fit(&rec.ndofs(), &rec.column("err_l2_u").unwrap(), 5).unwrap();
        let target = -(p as f64 + 1.0);
        let ok = (slope - target).abs() <= 0.25;
        pass &= ok;
        detail.push(format!("P={p}: {slope:.2} (want {target:.0}±0.25)"));
    }
    report(2, pass, &detail.join(", "));
    assert!(pass, "{}", detail.join(", "));
}

// ---------------------------------------------------------------------------
// 3. fixed-cost redistribution

#[test]
#[ignore = "nightly adaptation study"]
fn criterion_03_fixed_cost_redistribution() {
    let rec = fixed_cost("boundary-layer", 3, Mode::Solution, 9);
    let e = rec.column("energy_error").unwrap();
    let ratio = e[8] / e[0];
    let pass = ratio <= 1e-3;
    report(
        3,
        pass,
        &format!(
            "energy {:.3e} -> {:.3e}, ratio {ratio:.2e} (want <= 1e-3)",
            e[0], e[8]
        ),
    );
    assert!(pass, "ratio {ratio:e}");
}

// ---------------------------------------------------------------------------
// 4. E* tracks the energy error

#[test]
#[ignore = "nightly adaptation study"]
fn criterion_04_predicted_error_tracking() {
    let mut worst = 0.0f64;
    for rec in boundary_layer_runs() {
        let e = rec.column("energy_error").unwrap();
        let s = rec.column("e_star").unwrap();
        let n = e.len();
        for i in n.saturating_sub(8)..n {
            worst = worst.max((s[i] / e[i]).log10().abs());
        }
    }
    let pass = worst <= 0.5;
    report(
        4,
        pass,
        &format!("max |log10(E*/energy)| = {worst:.3} (want <= 0.5)"),
    );
    assert!(pass, "{worst}");
}

// ---------------------------------------------------------------------------
// 5. goal-oriented rates on the reverse boundary layer

#[test]
#[ignore = "nightly adaptation study"]
fn criterion_05_goal_oriented_rates() {
    let mut pass = true;
    let mut detail = Vec::new();
    for p in 1..=2 {
        let rec = run("reverse-layer", p, Mode::Goal, |_| {});
        let target = -(2.0 * p as f64 + 1.0);
        let (js, _) = rate_fit(&rec.ndofs(), &rec.column("target_error").unwrap(), 5).unwrap();
        let dwr: Vec<f64> = rec.column("dwr").unwrap().iter().map(|v| v.abs()).collect();
        let (ds, _) = rate_fit(&rec.ndofs(), &dwr, 5).unwrap();
        let ok = (js - target).abs() <= 0.4 && (ds - target).abs() <= 0.4;
        pass &= ok;
        detail.push(format!(
            "P={p}: |J| {js:.2}, DWR {ds:.2} (want {target:.0}±0.4)"
        ));
    }
    report(5, pass, &detail.join(", "));
    assert!(pass, "{}", detail.join(", "));
}

// ---------------------------------------------------------------------------
// 6. Gaussian peak at fixed cost

#[test]
#[ignore = "nightly adaptation study"]
fn criterion_06_gaussian_fixed_cost() {
    let rec = fixed_cost("gaussian", 2, Mode::Goal, 5);
    let j = rec.column("target_error").unwrap();
    let ratio = j[4] / j[0];
    let pass = ratio <= 1e-4;
    report(
        6,
        pass,
        &format!(
            "|J error| {:.3e} -> {:.3e}, ratio {ratio:.2e} (want <= 1e-4)",
            j[0], j[4]
        ),
    );
    assert!(pass, "ratio {ratio:e}");
}

// ---------------------------------------------------------------------------
// 7. grading towards the re-entrant corner

#[test]
#[ignore = "nightly adaptation study"]
fn criterion_07_l_shape_grading() {
    let mut pass = true;
    let mut detail = Vec::new();
    for p in 1..=3 {
        let tc = case("l-shape", &CaseParams::default()).unwrap();
        let mut settings = AdaptSettings::new(SpaceSpec::new(p, 2, TestNorm::Scaled).unwrap());
        settings.cycles = 15;
        let result = adapt_loop(&tc, tc.domain.initial_mesh(4).unwrap(), &settings).unwrap();
        let slope = grading_fit(&result.final_mesh, tc.singular_point.unwrap()).unwrap();
        let expected = 1.0 - (2.0 / 3.0) / (p as f64 + 2.0);
        let ok = (slope - expected).abs() <= 0.08;
        pass &= ok;
        detail.push(format!("P={p}: {slope:.3} (want {expected:.3}±0.08)"));
    }
    report(7, pass, &detail.join(", "));
    assert!(pass, "{}", detail.join(", "));
}

// ---------------------------------------------------------------------------
// 8. condition number growth

#[test]
#[ignore = "nightly adaptation study"]
fn criterion_08_condition_scaling() {
    let mut pass = true;
    let mut detail = Vec::new();
    for (solver, expected) in [(SolverKind::Normal, 2.0), (SolverKind::Dls, 1.0)] {
        let rec = run("l-shape", 2, Mode::Solution, |s| {
            s.cycles = 12;
            s.condition = true;
            s.solver = solver;
        });
        let inv_h: Vec<f64> = rec
            .column("h_min")
            .unwrap()
            .iter()
            .map(|h| 1.0 / h)
            .collect();
        let (slope, _) = loglog_fit(&inv_h, &rec.column("condition").unwrap()).unwrap();
        let ok = (slope - expected).abs() <= 0.4;
        pass &= ok;
        detail.push(format!("{solver:?}: {slope:.2} (want {expected:.1}±0.4)"));
    }
    report(8, pass, &detail.join(", "));
    assert!(pass, "{}", detail.join(", "));
}

// ---------------------------------------------------------------------------
// 9. regularisation damps oscillation

#[test]
#[ignore = "nightly adaptation study"]
fn criterion_09_regularization() {
    let steps = |regularize: bool| {
        let rec = run("flux", 2, Mode::Goal, |s| {
            s.cycles = 16;
            s.regularize = regularize;
        });
        let j = rec.column("target_error").unwrap();
        (non_monotone_steps(&j[5..=15]), j)
    };
    let (with, _) = steps(true);
    let (without, _) = steps(false);
    let pass = with <= 1 && without >= 2;
    report(9, pass, &format!("non-monotone steps over cycles 5-15: regularized {with} (want <= 1), plain {without} (want >= 2)"));
    assert!(pass, "regularized {with}, plain {without}");
}

// ---------------------------------------------------------------------------
// 10. property suites without PDE solves

fn spd_strategy() -> impl Strategy<Value = Metric> {
    (1e-3..1e6f64, 1.0..1e3f64, 0.0..PI).prop_map(|(d, b, t)| {
        MetricDecomposition {
            density: d,
            aspect_ratio: b,
            orientation: t,
        }
        .compose()
        .unwrap()
    })
}

/// `|K| / Σ|e|²`, about 0.144 for an equilateral triangle.
fn shape_quality(p: &[[f64; 2]; 3]) -> f64 {
    let l2: f64 = (0..3)
        .map(|i| {
            let (u, v) = (p[i], p[(i + 1) % 3]);
            (u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2)
        })
        .sum();
    signed_area(p).abs() / l2
}

fn triangle_strategy() -> impl Strategy<Value = [[f64; 2]; 3]> {
    prop::array::uniform3(prop::array::uniform2(-1.0..1.0f64))
        .prop_filter("non-degenerate", |p| shape_quality(p) > 1e-3)
}

fn homogeneous_strategy(max_order: usize) -> impl Strategy<Value = Poly2> {
    (1..=max_order).prop_flat_map(|i| {
        prop::collection::vec(-1.0..1.0f64, i + 1).prop_map(move |c| {
            let mut p = Poly2::zeros(i);
            for (l, v) in c.iter().enumerate() {
                p.set_coeff(l, i - l, *v);
            }
            p
        })
    })
}

fn components_strategy() -> impl Strategy<Value = (Vec<HomogeneousComponent>, f64)> {
    let one = (1usize..=5, 1e-2..1e2f64, 1.0..1e3f64, 0.0..PI)
        .prop_map(|(h, a, r, phi)| HomogeneousComponent::from_stats(2 * h, a, r, phi));
    (prop::collection::vec(one, 1..4), 1e-4..1e-1f64)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn suite(
    name: &str,
    cases: u32,
    f: impl FnOnce(&mut TestRunner) -> Result<(), String>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    f(&mut runner).map_err(|e| format!("{name}: {e}"))
}

fn metric_round_trips(r: &mut TestRunner) -> Result<(), String> {
    r.run(&spd_strategy(), |m| {
        let back = m.decompose().unwrap().compose().unwrap();
        let scale = m.as_sym().max_abs();
        for (a, b) in m.as_array().iter().zip(back.as_array()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale, "{m:?} -> {back:?}");
        }
        Ok(())
    })
    .map_err(|e| e.to_string())
}

fn implied_metric_residuals(r: &mut TestRunner) -> Result<(), String> {
    r.run(&triangle_strategy(), |p| {
        let m = implied_metric(&p).unwrap();
        for i in 0..3 {
            let e = [p[(i + 1) % 3][0] - p[i][0], p[(i + 1) % 3][1] - p[i][1]];
            prop_assert!(
                (m.quad(e) - 3.0).abs() <= 1e-10 * 3.0,
                "edge {i}: {}",
                m.quad(e)
            );
        }
        Ok(())
    })
    .map_err(|e| e.to_string())
}

fn bound_equalities(r: &mut TestRunner) -> Result<(), String> {
    r.run(&homogeneous_strategy(10), |poly| {
        let Some((a, a_orth, ratio, phi)) = direction_stats(&poly) else {
            return Ok(());
        };
        prop_assume!(ratio < RHO_MAX);
        let c = HomogeneousComponent::from_stats(poly.degree(), a, ratio, phi);
        let along = c.bound([phi.cos(), phi.sin()]);
        let across = c.bound([(phi - 0.5 * PI).cos(), (phi - 0.5 * PI).sin()]);
        prop_assert!(rel(along, a) <= 1e-10, "{along} vs {a}");
        prop_assert!((across - a_orth).abs() <= 1e-10 * a, "{across} vs {a_orth}");
        Ok(())
    })
    .map_err(|e| e.to_string())
}

fn grid_dominance(r: &mut TestRunner) -> Result<(), String> {
    r.run(&components_strategy(), |(comps, lambda)| {
        let found = minimize(&comps, lambda);
        let mut grid = f64::INFINITY;
        for i in 0..200 {
            let beta = BETA_MAX.powf(i as f64 / 199.0);
            for j in 0..200 {
                grid = grid.min(objective(&comps, lambda, beta, PI * j as f64 / 200.0));
            }
        }
        prop_assert!(
            found.objective <= grid * 1.005,
            "{} vs grid {grid}",
            found.objective
        );
        Ok(())
    })
    .map_err(|e| e.to_string())
}

fn indicator_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64, usize)> {
    (1usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(1e-8..1.0f64, n),
            prop::collection::vec(1e-6..1e-1f64, n),
            1.0..1e4f64,
            1usize..=3,
        )
    })
}

fn density_conservation(r: &mut TestRunner) -> Result<(), String> {
    r.run(&indicator_strategy(), |(eta, areas, n, p)| {
        let d = optimal_density(&eta, &areas, n, p).unwrap();
        let total: f64 = d.iter().zip(&areas).map(|(d, a)| d * a).sum();
        prop_assert!(rel(total, n) <= 1e-10, "{total} vs {n}");
        Ok(())
    })
    .map_err(|e| e.to_string())
}

fn equidistribution(r: &mut TestRunner) -> Result<(), String> {
    r.run(&indicator_strategy(), |(eta, areas, n, p)| {
        let d = optimal_density(&eta, &areas, n, p).unwrap();
        let e = equidistributed_error(&eta, n, p);
        let h = p as f64 + 2.0;
        for k in 0..eta.len() {
            let local = (abar(eta[k], areas[k], p) * (ALPHA / d[k]).powf(h)).sqrt();
            prop_assert!(rel(local, e) <= 1e-12, "element {k}: {local} vs {e}");
        }
        let total = ((n / ALPHA) * e * e).sqrt();
        prop_assert!(rel(total, predicted_error(&eta, n, p)) <= 1e-12);
        Ok(())
    })
    .map_err(|e| e.to_string())
}

fn gram_identity(r: &mut TestRunner) -> Result<(), String> {
    let discs: Vec<Discretization> = (1..=3)
        .map(|p| Discretization::new(SpaceSpec::new(p, 2, TestNorm::Scaled).unwrap()).unwrap())
        .collect();
    let strategy = (
        0usize..3,
        triangle_strategy(),
        prop::collection::vec(-1.0..1.0f64, 3 * 28),
        prop::collection::vec(-1.0..1.0f64, 64),
        (0.01..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
    );
    r.run(&strategy, |(i, pts, raw, trial, (eps, bx, by))| {
        let disc = &discs[i];
        let mesh = Triangulation::new(
            vec![pts[0], pts[1], pts[2]],
            vec![if signed_area(&pts) > 0.0 {
                [0, 1, 2]
            } else {
                [0, 2, 1]
            }],
            &[],
        )
        .unwrap();
        let m = disc.test.len();
        let g = disc.local_gram(&mesh, 0);
        let quad_form = |y: &[f64]| {
            let mut acc = 0.0;
            for a in 0..3 * m {
                for b in 0..3 * m {
                    acc += y[a] * g[(a, b)] * y[b];
                }
            }
            acc
        };

        // energy: the whitened residual norm equals the V-norm of its Riesz representer
        let problem = Problem::new(
            eps,
            [bx, by],
            Arc::new(|x: [f64; 2]| (3.0 * x[0]).sin() + x[1]),
            Arc::new(|_| 0.0),
        )
        .unwrap();
        let (stiffness, load) = disc.local_stiffness_load(&mesh, &problem, 0).unwrap();
        let n = stiffness.ncols();
        let block = ElementBlock::from_local(0, &g, &stiffness, &load, (0..n).collect()).unwrap();
        let res = block.residual(&trial[..n]);
        let energy: f64 = (0..res.nrows()).map(|j| res[j] * res[j]).sum();
        let y = block.unwhiten(&res);
        prop_assert!(
            rel(energy, quad_form(&y)) <= 1e-12,
            "energy {energy} vs {}",
            quad_form(&y)
        );

        // Gram form against the quadrature of the error density polynomial;
        // the monomial expansion loses digits on slivers
        if shape_quality(&pts) < 0.05 {
            return Ok(());
        }
        let y = &raw[..3 * m];
        let basis = ElementBasis::new(&disc.test, &mesh.element_points(0));
        let e = error_density_poly(&basis, y, disc.space.derivative_weight(mesh.area(0)));
        let c = mesh.centroid(0);
        let integral: f64 = disc
            .volume_rule
            .points
            .iter()
            .zip(&disc.volume_rule.weights)
            .map(|(xi, w)| {
                let x = basis.map.to_physical(*xi);
                w * basis.map.det * e.eval(x[0] - c[0], x[1] - c[1])
            })
            .sum();
        prop_assert!(
            rel(integral, quad_form(y)) <= 1e-10,
            "{integral} vs {}",
            quad_form(y)
        );
        Ok(())
    })
    .map_err(|e| e.to_string())
}

fn remesher_validity(r: &mut TestRunner) -> Result<(), String> {
    let strategy = (
        20.0..300.0f64,
        1.0..8.0f64,
        0.0..PI,
        0.0..1.0f64,
        0.0..1.0f64,
    );
    r.run(&strategy, |(base, aniso, angle, cx, cy)| {
        let field = FnMetric(move |x: [f64; 2]| {
            let bump = (-((x[0] - cx).powi(2) + (x[1] - cy).powi(2)) / 0.05).exp();
            MetricDecomposition {
                density: base * (1.0 + 4.0 * bump),
                aspect_ratio: 1.0 + (aniso - 1.0) * bump,
                orientation: angle,
            }
            .compose()
            .unwrap()
        });
        let start = unit_square(4).unwrap();
        let (mesh, _) = remesh_with(&start, &field, &RemeshConfig::default())
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        for k in 0..mesh.num_elements() {
            prop_assert!(
                signed_area(&mesh.element_points(k)) > 0.0,
                "inverted element {k}"
            );
        }
        prop_assert!((mesh.total_area() - 1.0).abs() < 1e-12);
        for corner in [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]] {
            prop_assert!(mesh
                .vertices()
                .iter()
                .any(|v| v[0] == corner[0] && v[1] == corner[1]));
        }
        Ok(())
    })
    .map_err(|e| e.to_string())
}

#[test]
fn criterion_10_property_suites() {
    let results = [
        suite("metric round-trip", 256, metric_round_trips),
        suite("implied metric", 256, implied_metric_residuals),
        suite("bound equalities", 256, bound_equalities),
        suite("grid dominance", 24, grid_dominance),
        suite("density conservation", 256, density_conservation),
        suite("equidistribution", 256, equidistribution),
        suite("gram identity", 64, gram_identity),
        suite("remesher validity", 8, remesher_validity),
    ];
    let failures: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    let pass = failures.is_empty();
    let detail = if pass {
        "8 property suites".to_string()
    } else {
        format!("{failures:?}")
    };
    report(10, pass, &detail);
    assert!(pass, "{detail}");
}
