use proptest::prelude::*;

use rbki::dense::{hcat, orthonormalize, VandermondeMatrix};
use rbki::io::{decode_raw, encode_raw, parse_matrix_market, write_matrix_market};
use rbki::krylov::{build_krylov_basis, gaussian_start_block, KrylovBasis};
use rbki::lab::{vandermonde_nonsparse_count, SpectrumModel};
use rbki::par::map_trials;
use rbki::random::{gaussian_matrix, rng_for};
use rbki::{gap_stats, recommend_q, DenseOperator, Execution, Mat, QRequest, SpectrumKind};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

fn decreasing_spectrum(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..0.95, len).prop_map(|ratios| {
        let mut s = 1.0;
        ratios
            .into_iter()
            .map(|r| {
                let out = s;
                s *= r;
                out
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn orthonormalize_spans_input(rows in 4usize..20, cols in 1usize..6, seed in any::<u64>()) {
        let cols = cols.min(rows);
        let m = gaussian_matrix(rows, cols, &mut rng_for(seed, 0));
        let (q, rank) = orthonormalize(&m, 1e-12).unwrap();
        prop_assert_eq!(rank, cols);
        prop_assert!((q.tr_mul(&q) - Mat::identity(rank, rank)).amax() < 1e-12);
        let residual = &m - &q * q.tr_mul(&m);
        prop_assert!(residual.amax() < 1e-10 * m.amax().max(1.0));
    }

    #[test]
    fn orthonormalize_drops_dependent_columns(rows in 5usize..15, seed in any::<u64>()) {
        let m = gaussian_matrix(rows, 3, &mut rng_for(seed, 0));
        let combo = &m * Mat::from_column_slice(3, 1, &[1.0, -2.0, 0.5]);
        let (_, rank) = orthonormalize(&hcat(&m, &combo), 1e-10).unwrap();
        prop_assert_eq!(rank, 3);
    }

    #[test]
    fn gap_statistics_are_consistent(s in decreasing_spectrum(12), k in 2usize..12) {
        let g = gap_stats(&s, k).unwrap();
        prop_assert!(g.min_relative_gap > 0.0 && g.min_relative_gap <= 1.0);
        prop_assert!(g.condition_number >= 1.0);
        let lambda1 = s[0] * s[0];
        prop_assert!(g.additive_gap >= lambda1 * g.min_relative_gap / g.condition_number * (1.0 - 1e-12));
    }

    #[test]
    fn recommended_q_is_monotone(
        s in decreasing_spectrum(24),
        k in 2usize..16,
        b in 1usize..8,
        eps in 0.01f64..0.9,
        delta in 0.01f64..0.9,
    ) {
        let b = b.min(k);
        let stats = gap_stats(&s, k).unwrap();
        let q = |eps: f64, delta: f64, n: usize| recommend_q(&stats, &QRequest::new(k, b, eps, delta, n)).unwrap();
        let base = q(eps, delta, 100);
        prop_assert!(base.q >= base.t);
        prop_assert_eq!(base.t, k.div_ceil(b));
        prop_assert!(q(eps / 2.0, delta, 100).q >= base.q);
        prop_assert!(q(eps, delta / 2.0, 100).q >= base.q);
        prop_assert!(q(eps, delta, 1000).q >= base.q);
        prop_assert!(base.unrounded() <= base.q as f64);
    }

    #[test]
    fn gautschi_chain_holds(nodes in prop::collection::btree_set(0u32..10_000, 1..8)) {
        let mut x: Vec<f64> = nodes.into_iter().map(|v| v as f64 / 10_000.0).collect();
        x.reverse();
        let t = x.len();
        let chain = VandermondeMatrix::new(x, t).unwrap().inverse_inf_norm().unwrap();
        prop_assert!(chain.holds(1e-9), "{:?}", chain);
    }

    #[test]
    fn vandermonde_never_too_sparse(
        ratio in 0.3f64..0.95,
        k in 4usize..30,
        t in 1usize..5,
        y in prop::collection::vec(-1.0f64..1.0, 5),
    ) {
        let t = t.min(k);
        let spectrum = SpectrumModel::geometric(k, ratio).unwrap();
        let v = spectrum.vandermonde(t).unwrap();
        let y = &y[..t];
        prop_assume!(y.iter().any(|c| c.abs() > 1e-3));
        let count = vandermonde_nonsparse_count(&v, y, &spectrum).unwrap();
        prop_assert!(count.count >= k - (t - 1));
    }

    #[test]
    fn matvec_count_matches_recurrence(n in 20usize..40, b in 1usize..4, q in 1usize..5, seed in any::<u64>()) {
        let a = gaussian_matrix(n, n - 3, &mut rng_for(seed, 0));
        let op = DenseOperator::new(a).unwrap();
        let g = gaussian_start_block(n, b, seed).unwrap();
        let basis = build_krylov_basis(&op, &g, q, 1e-12).unwrap();
        prop_assert_eq!(basis.matvec_cost, KrylovBasis::nominal_cost(b, q));
        prop_assert_eq!(basis.ncols(), b * q);
    }

    #[test]
    fn raw_and_market_round_trip(rows in 1usize..10, cols in 1usize..10, seed in any::<u64>()) {
        let m = gaussian_matrix(rows, cols, &mut rng_for(seed, 0)) * 1e3;
        prop_assert_eq!(decode_raw(&encode_raw(&m)).unwrap(), m.clone());
        let mut text = Vec::new();
        write_matrix_market(&m, &mut text).unwrap();
        prop_assert_eq!(parse_matrix_market(std::str::from_utf8(&text).unwrap()).unwrap(), m);
    }

    #[test]
    fn spectrum_kind_display_round_trips(ratio in 0.01f64..1.0, power in 0.1f64..4.0, pos in 1usize..50) {
        for kind in [
            SpectrumKind::Geometric { ratio },
            SpectrumKind::Polynomial { power },
            SpectrumKind::Gapped { ratio, positions: vec![pos, pos + 3], factor: 0.5 },
        ] {
            let back: SpectrumKind = kind.to_string().parse().unwrap();
            prop_assert_eq!(back, kind);
        }
    }

    #[test]
    fn trial_order_independent_of_execution(count in 0usize..50, seed in any::<u64>()) {
        let f = |i: usize| rbki::random::derive_seed(seed, i as u64);
        prop_assert_eq!(map_trials(count, Execution::Sequential, f), map_trials(count, Execution::Parallel, f));
    }
}
