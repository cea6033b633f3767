use grht_core::export::fmt17;
use grht_core::maps::HenonMap;
use grht_core::normal_form::{
    detect_resonances, eliminate_order_n, t0k_expansion_residual, OrderNTermTable, PolyTransform, TermOutcome,
    Monomial,
};
use grht_core::periodic::{classify, psi_pair, sr_family, sr_newton, CLASSIFY_TOL};
use grht_core::{GrhtMap, GrhtMapParams, HenonMapParams, PlanarMap, Point2, Preimages, Rect};
use proptest::prelude::*;

fn preset(i: usize) -> GrhtMapParams {
    [GrhtMapParams::param1(), GrhtMapParams::param2(), GrhtMapParams::param3(), GrhtMapParams::param4()][i]
}

/// Resonance decided in log space: `p ln|λ| + q ln|σ| = 0` and `λ^p σ^q > 0`.
fn log_oracle(lambda: f64, sigma: f64, max_order: i32) -> Vec<(i32, i32)> {
    let mut out = Vec::new();
    for p in -1..=max_order {
        for q in -1..=max_order {
            let positive = (lambda < 0.0 && p % 2 != 0) == (sigma < 0.0 && q % 2 != 0);
            if p + q >= 1 && positive && (p as f64 * lambda.abs().ln() + q as f64 * sigma.abs().ln()).abs() < 1e-9 {
                out.push((p, q));
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resonances_match_log_oracle(lambda in 0.05f64..0.95, sigma in 1.05f64..8.0, neg_l: bool, neg_s: bool) {
        let (l, s) = (if neg_l { -lambda } else { lambda }, if neg_s { -sigma } else { sigma });
        let r = detect_resonances(l, s, 8, 1e-9).unwrap();
        prop_assert_eq!(r.pairs, log_oracle(l, s, 8));
    }

    #[test]
    fn constructed_resonance_is_reported(lambda in 0.05f64..0.95, p in 1i32..5, q in 1i32..5) {
        let sigma = lambda.powf(-(p as f64) / q as f64);
        let r = detect_resonances(lambda, sigma, 8, 1e-9).unwrap();
        prop_assert!(r.contains(p, q));
        prop_assert_eq!(r.pairs, log_oracle(lambda, sigma, 8));
    }

    #[test]
    fn cubic_xy_term_resonant_iff_lambda_sigma_is_one(lambda in -0.95f64..0.95, sigma in 1.05f64..4.0, neg_s: bool, pin: bool) {
        prop_assume!(lambda.abs() > 0.05);
        let sigma = match (pin, neg_s) {
            (true, _) => 1.0 / lambda,
            (false, true) => -sigma,
            (false, false) => sigma,
        };
        prop_assume!(sigma.abs() > 1.0);
        let t = OrderNTermTable::new(3, vec![1.0; 4], vec![1.0; 4]).unwrap();
        let e = eliminate_order_n(lambda, sigma, &t, 1e-12);
        prop_assert_eq!(e.c[1] == TermOutcome::Resonant, (lambda * sigma - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pure_powers_are_always_eliminable(lambda in -0.95f64..0.95, sigma in 1.05f64..4.0, n in 2usize..7) {
        prop_assume!(lambda.abs() > 0.05);
        let t = OrderNTermTable::new(n, vec![1.0; n + 1], vec![1.0; n + 1]).unwrap();
        let e = eliminate_order_n(lambda, sigma, &t, 1e-12);
        prop_assert!(matches!(e.c[0], TermOutcome::Eliminated(_)));
        prop_assert!(matches!(e.c[n], TermOutcome::Eliminated(_)) || (lambda - sigma.powi(n as i32)).abs() < 1e-12);
    }

    #[test]
    fn transform_inverse_round_trips(c in prop::array::uniform4(-1.0f64..1.0), x in -0.05f64..0.05, y in -0.05f64..0.05) {
        let t = PolyTransform {
            terms: vec![
                Monomial { component: 0, px: 2, py: 0, coeff: c[0] },
                Monomial { component: 0, px: 1, py: 1, coeff: c[1] },
                Monomial { component: 1, px: 0, py: 2, coeff: c[2] },
                Monomial { component: 1, px: 2, py: 1, coeff: c[3] },
            ],
            claimed: vec![],
        };
        let z = Point2::new(x, y);
        let back = t.invert(t.apply(z)).unwrap();
        prop_assert!(back.dist(z) <= 1e-15);
    }

    #[test]
    fn sr_orbits_close_and_keep_their_class(i in 0usize..4, k in 8usize..=20) {
        let p = preset(i);
        let map = GrhtMap::new(p).unwrap();
        for sol in sr_family(&p, k).unwrap().rows() {
            prop_assert!(sol.closure_error(&map) <= 1e-9);
            prop_assert_eq!(classify(sol.trace, sol.det, CLASSIFY_TOL), sol.stability);
            prop_assert_eq!(sol.points.len(), k + 1);
        }
    }

    #[test]
    fn sr_orbits_obey_saddle_neighbourhood_bounds(i in 0usize..4, k in 8usize..=20) {
        let p = preset(i);
        for sol in sr_family(&p, k).unwrap().rows() {
            let near = sol.points.iter().copied().min_by(|a, b| a.dist(Point2::new(1.0, 0.0)).total_cmp(&b.dist(Point2::new(1.0, 0.0)))).unwrap();
            prop_assert!(near.y.abs() <= 2.0 * p.sigma.abs().powf(-(k as f64) / 2.0));
            let omega = sol.points[..=k]
                .iter()
                .enumerate()
                .map(|(j, z)| (z.x.abs() / p.lambda.abs().powi(j as i32)).max(z.y.abs() / p.sigma.abs().powi(j as i32 - k as i32)))
                .fold(0.0, f64::max);
            prop_assert!(omega <= 10.0, "omega {}", omega);
        }
    }

    #[test]
    fn linear_local_map_has_zero_expansion_residual(i in 0usize..4, k in 1usize..30, x in 0.1f64..1.0, t in 0.1f64..1.0) {
        let p = preset(i);
        // Keep every iterate below the strip: |y_j| ≤ |σ|^{k-1} |y| ≤ t·h0.
        let y = t * p.h0() / p.sigma.abs().powi(k as i32 - 1);
        let (rx, ry) = t0k_expansion_residual(&p, k, Point2::new(x, y)).unwrap();
        prop_assert!(rx <= 1e-13 && ry <= 1e-13);
    }

    #[test]
    fn henon_preimages_map_back(x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let m = HenonMap::new(HenonMapParams::new(-0.4, 0.8, 0.08, -0.125)).unwrap();
        let target = Point2::new(x, y);
        let set = m.preimages(target, Rect::new(-50.0, 50.0, -50.0, 50.0)).unwrap();
        for w in &set.points {
            prop_assert!(m.eval(*w).dist(target) <= 1e-9 * (1.0 + target.norm()));
        }
    }

    #[test]
    fn fmt17_round_trips_any_finite(v in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        prop_assert_eq!(fmt17(v).parse::<f64>().unwrap(), v);
    }
}

/// With `d1 = 0.9 y*/x*` the SR_k branch's trace is `2 d5 ψ−` for the root
/// `ψ−` of `d5 ψ² + (ρ c2 − 1) ψ + (ρ − 1) σ^k = 0`, `ρ = 0.9`, which grows
/// like `σ^{k/2}`.
#[test]
fn broken_global_resonance_trace_grows_without_bound() {
    let mut p = GrhtMapParams::param1();
    p.d1 = 0.9;
    let map = GrhtMap::new(p).unwrap();
    let mut taus = Vec::new();
    for k in 6..=16usize {
        let rho = p.d1;
        let sk = p.sigma.powi(k as i32);
        let (a, b, c) = (p.d5, rho * p.c2 - 1.0, (rho - 1.0) * sk);
        let psi = (-b - (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
        let u = psi / sk;
        let seed = Point2::new(p.lambda.powi(k as i32) * (1.0 + p.c2 * u), 1.0 + u);
        let sol = sr_newton(&map, k, 1, seed).unwrap();
        assert!((sol.trace - 2.0 * p.d5 * psi).abs() <= 1e-8 * psi.abs().max(1.0), "k={k}: {} vs {}", sol.trace, 2.0 * psi);
        let closed = psi_pair(&p, k).unwrap().psi_minus;
        assert!((closed - psi).abs() <= 1e-12 * psi.abs(), "{closed} vs {psi}");
        taus.push(sol.trace.abs());
    }
    assert!(taus.windows(2).all(|w| w[1] > w[0]), "{taus:?}");
    let growth = taus[taus.len() - 1] / taus[taus.len() - 2];
    assert!((growth - p.sigma.sqrt()).abs() < 0.05, "{growth}");
    assert!(taus[taus.len() - 1] > 4.0 * taus[0]);
}

#[test]
fn unperturbed_parity_failure_has_no_orbits() {
    for k in [1usize, 7, 13] {
        assert_eq!(sr_family(&GrhtMapParams::param3(), k).unwrap().rows().count(), 0);
    }
    for k in [2usize, 8, 14] {
        assert_eq!(sr_family(&GrhtMapParams::param4(), k).unwrap().rows().count(), 0);
    }
}
