use nalgebra::DVector;
use proptest::prelude::*;
use quadproj::instance::{gaussian_vector, random_central_quadric, random_orthogonal};
use quadproj::oracle::{oracle_project_param2d, oracle_project_secular, DEFAULT_PARAM_SAMPLES};
use quadproj::{Projector, Quadric, SecularProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, n: usize) -> (Projector, DVector<f64>, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_central_quadric(&mut rng, n);
    let x0 = gaussian_vector(&mut rng, n) * rng.random_range(0.1..5.0);
    (Projector::new(q).unwrap(), x0, rng)
}

/// Random point of the root interval at least `margin` away from every pole.
fn interior_point(sp: &SecularProblem, rng: &mut ChaCha8Rng, margin: f64) -> Option<f64> {
    let ri = sp.root_interval();
    let lo = if ri.lower.is_finite() { ri.lower } else { -10.0 };
    let hi = if ri.upper.is_finite() { ri.upper } else { lo.max(0.0) + 10.0 };
    let mu = rng.random_range(lo..hi);
    let gap = sp.poles().iter().map(|p| (mu - p).abs()).fold(f64::INFINITY, f64::min);
    (gap >= margin).then_some(mu)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projection_is_feasible(seed in any::<u64>(), n in 2usize..=50) {
        let (p, x0, _) = instance(seed, n);
        let res = p.project(&x0).unwrap();
        prop_assert!(p.quadric().is_feasible(&res.point, 1e-8), "psi = {:e}", p.quadric().evaluate(&res.point));
        prop_assert!((res.distance - (&res.point - &x0).norm()).abs() <= 1e-12 * (1.0 + res.distance));
    }

    #[test]
    fn every_candidate_is_a_kkt_point(seed in any::<u64>(), n in 2usize..=30) {
        let (p, x0, _) = instance(seed, n);
        let res = p.project(&x0).unwrap();
        let sp = p.secular_problem(&x0).unwrap();
        for c in &res.candidates {
            let r = sp.kkt_residual(&c.y, c.mu);
            prop_assert!(r <= 1e-8, "{:?} residual {r:e}", c.kind);
        }
        let best = res.selected().dist2;
        prop_assert!(res.candidates.iter().all(|c| c.dist2 >= best * (1.0 - 1e-12)));
    }

    #[test]
    fn secular_function_decreases(seed in any::<u64>(), n in 2usize..=20) {
        let (p, x0, mut rng) = instance(seed, n);
        let sp = p.secular_problem(&x0).unwrap();
        prop_assume!(sp.y0().norm() > 0.0);
        for _ in 0..100 {
            if let Some(mu) = interior_point(&sp, &mut rng, 1e-6) {
                prop_assert!(sp.f_derivative(mu).unwrap() < 0.0);
            }
        }
    }

    #[test]
    fn derivative_matches_finite_differences(seed in any::<u64>(), n in 2usize..=20) {
        let (p, x0, mut rng) = instance(seed, n);
        let sp = p.secular_problem(&x0).unwrap();
        for _ in 0..20 {
            let Some(mu) = interior_point(&sp, &mut rng, 0.01) else { continue };
            let gap = sp.poles().iter().map(|q| (mu - q).abs()).fold(f64::INFINITY, f64::min);
            let h = 1e-6 * gap.min(1.0);
            let numeric = (sp.f_value(mu + h).unwrap() - sp.f_value(mu - h).unwrap()) / (2.0 * h);
            let exact = sp.f_derivative(mu).unwrap();
            prop_assert!((numeric - exact).abs() <= 1e-6 * exact.abs(), "{numeric} vs {exact}");
        }
    }

    #[test]
    fn idempotent(seed in any::<u64>(), n in 2usize..=20) {
        let (p, x0, _) = instance(seed, n);
        let first = p.project(&x0).unwrap();
        let second = p.project(&first.point).unwrap();
        prop_assert!((&second.point - &first.point).norm() <= 1e-7 * (1.0 + x0.norm()));
    }

    #[test]
    fn orthogonal_equivariance(seed in any::<u64>(), n in 2usize..=15) {
        let (p, x0, mut rng) = instance(seed, n);
        let q = p.quadric();
        let rot = random_orthogonal(&mut rng, n);
        let t = gaussian_vector(&mut rng, n);
        let a2 = &rot * q.a() * rot.transpose();
        let rb = &rot * q.b();
        let b2 = &rb - 2.0 * &a2 * &t;
        let c2 = q.c() + t.dot(&(&a2 * &t)) - rb.dot(&t);
        let moved = Projector::new(Quadric::new(a2, b2, c2).unwrap()).unwrap();
        let res = p.project(&x0).unwrap();
        let res2 = moved.project(&(&rot * &x0 + &t)).unwrap();
        prop_assert!((res2.distance - res.distance).abs() <= 1e-8 * res.distance.max(1e-12));
        if !res.degenerate {
            let expected = &rot * &res.point + &t;
            prop_assert!((&res2.point - expected).norm() <= 1e-7 * (1.0 + x0.norm()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn agrees_with_oracle(seed in any::<u64>(), n in 2usize..=8, zero_mask in any::<u8>(), shrink in 0.05f64..1.0) {
        let (p, x0, _) = instance(seed, n);
        // Zero some standardized coordinates to reach degenerate configurations.
        let form = p.standard_form();
        let mut y0 = form.to_std(&x0) * shrink;
        for i in 0..n {
            if zero_mask & (1 << i) != 0 {
                y0[i] = 0.0;
            }
        }
        let x0 = form.from_std(&y0);
        let res = p.project(&x0).unwrap();
        let sp = p.secular_problem(&x0).unwrap();
        let oracle = oracle_project_secular(&sp).unwrap();
        let d = (form.from_std(&oracle.y) - &x0).norm();
        prop_assert!((res.distance - d).abs() <= 1e-7 * (1.0 + d), "{} vs oracle {d}", res.distance);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn oracles_agree_in_the_plane(seed in any::<u64>()) {
        let (p, x0, _) = instance(seed, 2);
        let sp = p.secular_problem(&x0).unwrap();
        let secular = oracle_project_secular(&sp).unwrap();
        let d_secular = (p.standard_form().from_std(&secular.y) - &x0).norm();
        let (_, d_param) = oracle_project_param2d(p.quadric(), &x0, DEFAULT_PARAM_SAMPLES).unwrap();
        prop_assert!((d_secular - d_param).abs() <= 1e-6, "{d_secular} vs {d_param}");
    }
}

#[test]
fn newton_iterations_stay_low() {
    let mut counts = Vec::new();
    for (n, count) in [(10, 100), (100, 100), (500, 10)] {
        for k in 0..count {
            let (p, x0, _) = instance(9_000 + k, n);
            let res = p.project(&x0).unwrap();
            counts.push(res.newton_iterations);
        }
    }
    let within = counts.iter().filter(|&&k| k <= 20).count();
    assert!(within * 100 >= counts.len() * 95, "{within} of {} within 20", counts.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn near_degenerate_inputs(seed in any::<u64>(), n in 2usize..=8, exps in prop::collection::vec(-12.0f64..0.0, 8), shrink in 0.01f64..1.0) {
        let (p, x0, _) = instance(seed, n);
        let form = p.standard_form();
        let mut y0 = form.to_std(&x0) * shrink;
        for i in 0..n {
            y0[i] *= 10f64.powf(exps[i]);
        }
        let x0 = form.from_std(&y0);
        let res = p.project(&x0).unwrap();
        prop_assert!(p.quadric().is_feasible(&res.point, 1e-8), "psi = {:e}", p.quadric().evaluate(&res.point));
        let sp = p.secular_problem(&x0).unwrap();
        let best = res.selected();
        prop_assert!(sp.kkt_residual(&best.y, best.mu) <= 1e-8);
        let oracle = oracle_project_secular(&sp).unwrap();
        let d = (form.from_std(&oracle.y) - &x0).norm();
        prop_assert!((res.distance - d).abs() <= 1e-7 * (1.0 + d), "{} vs oracle {d}", res.distance);
        prop_assert!(res.newton_iterations <= 50, "{} iterations", res.newton_iterations);
    }
}
