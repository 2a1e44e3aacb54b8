use proptest::prelude::*;

use ruelle_core::concentration::DobrushinMatrices;
use ruelle_core::decoupling::{bond_energy, density_estimate, left_right_energy, BondOrder, DensityOptions};
use ruelle_core::gibbs::{whole_line_single_site_kernel, window_gibbs};
use ruelle_core::model::{PairInteraction, PotentialSpec};
use ruelle_core::stats::total_variation;
use ruelle_core::{Boundary, Side, Tail, Window};

fn spin() -> impl Strategy<Value = i8> {
    prop_oneof![Just(1i8), Just(-1i8)]
}

fn tail() -> impl Strategy<Value = Tail> {
    prop_oneof![
        Just(Tail::AllPlus),
        Just(Tail::AllMinus),
        Just(Tail::Alternating),
        prop::collection::vec(spin(), 1..5).prop_map(Tail::Periodic),
    ]
}

fn window() -> impl Strategy<Value = Window> {
    (-3i64..=0, 1usize..=5).prop_map(|(lo, len)| Window::new(lo, lo + len as i64 - 1).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn global_flip_maps_measure_to_flipped_measure(
        alpha in 1.2f64..3.0, beta in 0.0f64..0.4, w in window(), left in tail(), right in tail()
    ) {
        let inter = PairInteraction::dyson(alpha, beta).unwrap();
        let b = Boundary::tails(left, right);
        let mu = window_gibbs(&inter, &w, &b).unwrap();
        let nu = window_gibbs(&inter, &w, &b.flipped()).unwrap();
        for k in 0..mu.len() {
            let flipped: Vec<i8> = mu.word(k).iter().map(|s| -s).collect();
            prop_assert!((mu.probs[k] - nu.prob(&flipped).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn magnetization_is_monotone_in_the_boundary(
        alpha in 1.2f64..3.0, beta in 0.0f64..0.4, w in window(), left in tail(), right in tail(), site in 0usize..5
    ) {
        let inter = PairInteraction::dyson(alpha, beta).unwrap();
        let i = w.lo + (site % w.len()) as i64;
        let p = |b: Boundary| window_gibbs(&inter, &w, &b).unwrap().site_marginal(i, 1).unwrap();
        let plus = p(Boundary::uniform(Tail::AllPlus));
        let mid = p(Boundary::tails(left, right));
        let minus = p(Boundary::uniform(Tail::AllMinus));
        prop_assert!(minus <= mid + 1e-12 && mid <= plus + 1e-12);
    }

    #[test]
    fn left_right_energy_is_the_bilinear_double_sum(
        alpha in 1.1f64..3.0, beta in 0.0f64..1.0, xs in prop::collection::vec(spin(), 7), n in 1usize..=6
    ) {
        let inter = PairInteraction::dyson(alpha, beta).unwrap();
        let xi = &xs[..n];
        let sigma: Vec<i8> = xs.iter().rev().take(n + 1).copied().collect();
        let w = left_right_energy(&inter, xi, &sigma).unwrap();
        let mut oracle = 0.0;
        for i in 1..=n {
            for (j, &s) in sigma.iter().enumerate() {
                oracle -= beta * ((i + j) as f64).powf(-alpha) * xi[i - 1] as f64 * s as f64;
            }
        }
        prop_assert!((w - oracle).abs() < 1e-12 * (1.0 + oracle.abs()));
        let neg: Vec<i8> = xi.iter().map(|s| -s).collect();
        prop_assert!((left_right_energy(&inter, &neg, &sigma).unwrap() + w).abs() < 1e-12);
        let square = BondOrder::Square.bonds(BondOrder::square_count(n as u64));
        prop_assert!((bond_energy(&inter, &square, xi, &sigma) - w).abs() < 1e-12);
    }

    #[test]
    fn bond_orders_are_bijections(rank in 0u64..100_000) {
        for order in [BondOrder::Square, BondOrder::Diagonal] {
            prop_assert_eq!(order.rank(order.bond(rank)), rank);
        }
    }

    #[test]
    fn dbar_rows_obey_the_neumann_bound(alpha in 1.2f64..3.0, frac in 0.0f64..0.9, len in 1usize..=12) {
        let beta = frac * ruelle_core::model::beta_du(alpha).unwrap();
        let inter = PairInteraction::dyson(alpha, beta).unwrap();
        let bar_c = inter.require_uniqueness().unwrap();
        let m = DobrushinMatrices::new(&inter, &Window::centered(len).unwrap()).unwrap();
        for s in m.dbar_row_sums() {
            prop_assert!(s >= 1.0 && s <= 1.0 / (1.0 - bar_c) + 1e-12);
        }
        for a in 0..len {
            prop_assert!(m.dbar[(a, a)] >= 1.0);
            for b in 0..len {
                prop_assert!(m.dbar[(a, b)] >= m.cbar[(a, b)]);
            }
        }
    }

    #[test]
    fn cbar_is_symmetric_and_translation_invariant(alpha in 1.1f64..3.0, beta in 0.0f64..1.0, i in -50i64..50, j in -50i64..50, s in -20i64..20) {
        let inter = PairInteraction::dyson(alpha, beta).unwrap();
        prop_assert_eq!(inter.cbar(i, j), inter.cbar(j, i));
        prop_assert_eq!(inter.cbar(i, j), inter.cbar(i + s, j + s));
    }

    #[test]
    fn whole_line_kernel_matches_window_gibbs_at_the_origin(
        alpha in 1.2f64..3.0, beta in 0.0f64..0.5,
        lh in prop::collection::vec(spin(), 0..4), left in tail(),
        rh in prop::collection::vec(spin(), 0..4), right in tail(),
    ) {
        let spec = PotentialSpec::dyson(alpha, beta).unwrap().with_truncation(10_000).unwrap();
        let inter = spec.interaction().unwrap();
        let l = Side::new(lh, Some(left));
        let r = Side::new(rh, Some(right));
        let mu = window_gibbs(&inter, &Window::site(0), &Boundary::new(l.clone(), r.clone())).unwrap();
        let k = whole_line_single_site_kernel(&spec, 1, &l, &r).unwrap();
        let p = mu.site_marginal(0, 1).unwrap();
        prop_assert!((p - k.value).abs() <= k.error + mu.probability_error() + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn exact_densities_are_positive(alpha in 1.6f64..3.0, frac in 0.0f64..0.8, d in 1usize..=3, n in 1usize..=4) {
        let beta = frac * ruelle_core::model::beta_du(alpha).unwrap();
        let spec = PotentialSpec::dyson(alpha, beta).unwrap();
        let est = density_estimate(&spec, &DensityOptions::exact(d, n)).unwrap();
        prop_assert!(est.values.iter().all(|&v| v > 0.0 && v.is_finite()));
        let total: f64 = est.nu_plus.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn total_variation_is_a_metric_on_laws(
        p in prop::collection::vec(0.01f64..1.0, 4), q in prop::collection::vec(0.01f64..1.0, 4), r in prop::collection::vec(0.01f64..1.0, 4)
    ) {
        let norm = |v: Vec<f64>| { let s: f64 = v.iter().sum(); v.into_iter().map(|x| x / s).collect::<Vec<_>>() };
        let (p, q, r) = (norm(p), norm(q), norm(r));
        prop_assert!((total_variation(&p, &q) - total_variation(&q, &p)).abs() < 1e-15);
        prop_assert!(total_variation(&p, &q) <= 1.0 + 1e-15);
        prop_assert!(total_variation(&p, &r) <= total_variation(&p, &q) + total_variation(&q, &r) + 1e-15);
    }
}
