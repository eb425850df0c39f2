mod common;

use icacdma_core::channel::generate_symbols;
use icacdma_core::codes::{m_sequence, periodic_correlation, POLY_A, POLY_B};
use icacdma_core::detectors::{combine, resolve_ambiguity, DetectorOutput};
use icacdma_core::ica::{amari_index, IcaResult};
use icacdma_core::numkit::{covariance, whiten, Matrix};
use proptest::prelude::*;

fn output(soft: Matrix) -> DetectorOutput {
    let users = soft.rows();
    let hard = Matrix::from_fn(soft.rows(), soft.cols(), |i, j| if soft[(i, j)] < 0.0 { -1.0 } else { 1.0 });
    DetectorOutput {
        hard_symbols: hard,
        soft_values: soft,
        ica_converged: Some(true),
        ica_iterations: Some(1.0),
        failed: false,
        sud_fallback: vec![false; users],
    }
}

fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut s = seed;
    for i in (1..n).rev() {
        s = icacdma_core::rng::mix64(s);
        p.swap(i, (s % (i as u64 + 1)) as usize);
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn whitened_covariance_is_identity(n in 2usize..6, m in 60usize..400, seed in any::<u64>()) {
        let s = common::mixed_sources(n, m, seed);
        let x = &common::random_mixing(n, seed) * &s;
        if let Ok((z, w)) = whiten(&x) {
            let c = covariance(&z).unwrap();
            prop_assert!(c.sub(&Matrix::identity(n)).unwrap().max_abs() < 1e-8);
            let back = w.restore(&z).unwrap();
            prop_assert!(back.sub(&x).unwrap().max_abs() < 1e-8 * x.max_abs().max(1.0));
        }
    }

    #[test]
    fn amari_is_zero_exactly_for_scaled_permutations(
        n in 2usize..7,
        seed in any::<u64>(),
        scales in prop::collection::vec(prop_oneof![-5.0f64..-0.1, 0.1f64..5.0], 7),
    ) {
        let p = permutation(n, seed);
        let m = Matrix::from_fn(n, n, |i, j| if p[i] == j { scales[i] } else { 0.0 });
        prop_assert_eq!(amari_index(&m), 0.0);
        let mut leaky = m.clone();
        leaky[(0, p[1])] = 0.3 * scales[0];
        let a = amari_index(&leaky);
        prop_assert!(a > 0.0 && a <= 1.0);
    }

    #[test]
    fn ambiguity_resolution_ignores_component_scale(
        seed in any::<u64>(),
        scale in prop_oneof![-10.0f64..-0.01, 0.01f64..10.0],
        row in 0usize..4,
    ) {
        let users = 3;
        let b = generate_symbols(users, 80, seed).unwrap();
        let noise = common::gaussian(4, 80, seed ^ 7);
        let p = permutation(4, seed);
        // Component p[k] carries user k (k < 3) plus a little noise; p[3] is noise.
        let sources = Matrix::from_fn(4, 80, |c, t| {
            let user = p.iter().position(|&x| x == c).unwrap();
            if user < users { b[(user, t)] + 0.2 * noise[(c, t)] } else { noise[(c, t)] }
        });
        let make = |s: Matrix| IcaResult {
            unmixing: Matrix::identity(4),
            sources: s,
            iterations: vec![1; 4],
            converged: vec![true; 4],
            contrast_value: 0.0,
        };
        let pilots = b.column_range(0, 50);
        let base = resolve_ambiguity(&make(sources.clone()), &pilots).unwrap();
        let mut scaled = sources;
        for v in scaled.row_mut(row) {
            *v *= scale;
        }
        let other = resolve_ambiguity(&make(scaled), &pilots).unwrap();
        prop_assert_eq!(&base.assignment, &other.assignment);
        for k in 0..users {
            if base.assignment[k] == Some(row) && scale < 0.0 {
                prop_assert_eq!(base.signs[k], -other.signs[k]);
            } else {
                prop_assert_eq!(base.signs[k], other.signs[k]);
            }
        }
    }

    #[test]
    fn combine_keeps_agreements_and_picks_one_side(
        a in prop::collection::vec(-3.0f64..3.0, 40),
        b in prop::collection::vec(-3.0f64..3.0, 40),
    ) {
        let sud = output(Matrix::new(2, 20, a).unwrap());
        let ica = output(Matrix::new(2, 20, b).unwrap());
        let merged = combine(&sud, &ica).unwrap();
        for i in 0..2 {
            for t in 0..20 {
                let (s, c, m) = (sud.hard_symbols[(i, t)], ica.hard_symbols[(i, t)], merged.hard_symbols[(i, t)]);
                if s == c {
                    prop_assert_eq!(m, s);
                }
                let v = merged.soft_values[(i, t)];
                prop_assert!(v == sud.soft_values[(i, t)] || v == ica.soft_values[(i, t)]);
            }
        }
        let mut failed = ica.clone();
        failed.failed = true;
        let fallback = combine(&sud, &failed).unwrap();
        prop_assert_eq!(&fallback.hard_symbols, &sud.hard_symbols);
    }

    #[test]
    fn m_sequences_are_balanced_for_every_start(init in 1u32..32, use_b in any::<bool>()) {
        let poly = if use_b { POLY_B } else { POLY_A };
        let s = m_sequence(poly, init).unwrap();
        let negatives = s.iter().filter(|&&c| c == -1).count();
        prop_assert_eq!(negatives, 16);
        for shift in 1..31 {
            prop_assert_eq!(periodic_correlation(&s, &s, shift), -1);
        }
    }

    #[test]
    fn symbol_generation_is_a_pure_function_of_seed(k in 1usize..8, m in 1usize..300, seed in any::<u64>()) {
        let a = generate_symbols(k, m, seed).unwrap();
        prop_assert_eq!(&a, &generate_symbols(k, m, seed).unwrap());
        prop_assert!(a.as_slice().iter().all(|&v| v == 1.0 || v == -1.0));
    }

    #[test]
    fn matmul_transpose_identity(r in 1usize..6, k in 1usize..6, c in 1usize..6, seed in any::<u64>()) {
        let a = common::gaussian(r, k, seed);
        let b = common::gaussian(k, c, seed ^ 1);
        let lhs = (&a * &b).transpose();
        let rhs = &b.transpose() * &a.transpose();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
    }
}
