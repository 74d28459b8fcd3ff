//! Property-based invariants for the operator algebra and the
//! certificate constructions. Exact claims run over rationals; float
//! claims stick to dyadic grids or carry explicit tolerances.

mod common;

use num_bigint::BigInt;
use proptest::prelude::*;

use latcomm_core::constructions::{averaging_report, build_x};
use latcomm_core::selfcomm::{build_block_shift, lemma_block_shift, partition_diagonal};
use latcomm_core::verify::{check_power_inequality, verify_certificate, PowerInequalityVerdict};
use latcomm_core::{
    switch_operator, DiagonalSpec, LatticeOperator, Mat, Rat, ToleranceConfig, WeightedSpace,
};

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

fn signed_rat() -> impl Strategy<Value = Rat> {
    (-8i64..8, 1i64..6).prop_map(|(n, d)| rat(n, d))
}

fn nonneg_rat() -> impl Strategy<Value = Rat> {
    (0i64..8, 1i64..6).prop_map(|(n, d)| rat(n, d))
}

fn small_space() -> impl Strategy<Value = WeightedSpace> {
    prop_oneof![
        (1usize..=5).prop_map(|n| WeightedSpace::sequence(n).unwrap()),
        (1usize..=5).prop_map(|n| WeightedSpace::dyadic(n).unwrap()),
        (1usize..=3, 1usize..=3).prop_map(|(a, b)| WeightedSpace::direct_sum(vec![
            WeightedSpace::sequence(a).unwrap(),
            WeightedSpace::dyadic(b).unwrap(),
        ])
        .unwrap()),
    ]
}

/// Random rational endomorphism together with two vectors on its space.
fn rat_op_and_vectors(
) -> impl Strategy<Value = (LatticeOperator<Rat>, Vec<Rat>, Vec<Rat>)> {
    small_space().prop_flat_map(|space| {
        let dim = space.dim();
        (
            prop::collection::vec(signed_rat(), dim * dim),
            prop::collection::vec(signed_rat(), dim),
            prop::collection::vec(signed_rat(), dim),
        )
            .prop_map(move |(vals, x, y)| {
                let m = Mat::from_fn(dim, dim, |i, j| vals[i * dim + j].clone());
                let op = LatticeOperator::new(space.clone(), space.clone(), m).unwrap();
                (op, x, y)
            })
    })
}

proptest! {
    #[test]
    fn adjoint_is_an_involution((a, _, _) in rat_op_and_vectors()) {
        prop_assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn adjoint_moves_across_the_pairing((a, x, y) in rat_op_and_vectors()) {
        let left = a.codomain().dot(&a.apply(&x), &y);
        let right = a.domain().dot(&x, &a.adjoint().apply(&y));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn selfcommutator_has_zero_plain_trace((a, _, _) in rat_op_and_vectors()) {
        let c = a.self_commutator().unwrap();
        let mut trace = rat(0, 1);
        for v in c.entries().diag() {
            trace += v;
        }
        prop_assert_eq!(trace, rat(0, 1));
    }

    #[test]
    fn composing_nonnegative_operators_stays_in_the_cone(
        pair in small_space().prop_flat_map(|space| {
            let dim = space.dim();
            (
                prop::collection::vec(nonneg_rat(), dim * dim),
                prop::collection::vec(nonneg_rat(), dim * dim),
            )
                .prop_map(move |(u, v)| {
                    let mu = Mat::from_fn(dim, dim, |i, j| u[i * dim + j].clone());
                    let mv = Mat::from_fn(dim, dim, |i, j| v[i * dim + j].clone());
                    (
                        LatticeOperator::new(space.clone(), space.clone(), mu).unwrap(),
                        LatticeOperator::new(space.clone(), space.clone(), mv).unwrap(),
                    )
                })
        })
    ) {
        let (a, b) = pair;
        let ab = a.compose(&b).unwrap();
        for (_, _, v) in ab.entries().entries() {
            prop_assert!(*v >= rat(0, 1));
        }
    }

    #[test]
    fn partition_invariants_hold(
        d in prop::collection::vec(nonneg_rat(), 1..40),
        k in 1usize..8,
    ) {
        prop_assert_eq!(common::check_partition(&d, k), Ok(()));
    }

    #[test]
    fn switch_is_a_self_adjoint_involution(base in small_space()) {
        let space = WeightedSpace::repeat(&base, 2).unwrap();
        let u = switch_operator::<Rat>(&space).unwrap();
        prop_assert_eq!(u.adjoint(), u.clone());
        prop_assert_eq!(
            u.compose(&u).unwrap(),
            LatticeOperator::identity(space)
        );
    }

    #[test]
    fn averaging_norm_behaviour(
        f in prop::collection::vec(nonneg_rat(), 1..=8),
        g in prop::collection::vec(signed_rat(), 1..=8),
    ) {
        let cone = averaging_report(&f).unwrap();
        prop_assert!(cone.equality && cone.contraction);
        let signed = averaging_report(&g).unwrap();
        prop_assert!(signed.contraction);
    }

    #[test]
    fn factorization_norm_is_the_largest_root(
        d in prop::collection::vec((0u32..32).prop_map(|j| j as f64 / 8.0), 1..=6),
    ) {
        let spec = DiagonalSpec::on_sequence(d.clone()).unwrap();
        let x = build_x(&spec, d.len()).unwrap();
        let est = x.operator_norm(&ToleranceConfig::default());
        let expected = d.iter().cloned().fold(0.0f64, f64::max).sqrt();
        prop_assert!(est.converged);
        prop_assert!((est.value - expected).abs() <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_certificates_pass_their_own_verifier(
        d in prop::collection::vec((0u32..=32).prop_map(|j| j as f64 / 16.0), 1..=8),
        k in 2usize..=5,
    ) {
        let cfg = ToleranceConfig::default();
        let p = partition_diagonal(&d, k).unwrap();
        let cert = build_block_shift(&p, &cfg).unwrap();
        let report = verify_certificate(&cert, &cfg);
        prop_assert!(report.all_passed, "failed checks: {:?}",
            report.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect::<Vec<_>>());
    }

    #[test]
    fn lemma_certificates_realize_t_head_minus_t_tail(
        t in prop::collection::vec((0u32..=16).prop_map(|j| j as f64 / 4.0), 1..=5),
        k in 2usize..=5,
    ) {
        let cfg = ToleranceConfig::default();
        let m = t.len();
        let spec = DiagonalSpec::on_sequence(t.clone()).unwrap();
        let cert = lemma_block_shift(&spec, k, &cfg).unwrap();
        prop_assert!(verify_certificate(&cert, &cfg).all_passed);

        let c = cert.commutator();
        for (i, j, v) in c.entries().entries() {
            let expected = if i == j && i < m {
                t[i]
            } else if i == j && i >= (k - 1) * m {
                -t[i - (k - 1) * m]
            } else {
                0.0
            };
            prop_assert!((v - expected).abs() <= 1e-12,
                "commutator entry ({i},{j}) = {v}, expected {expected}");
        }
    }

    #[test]
    fn power_inequality_holds_for_diagonal_operators(
        d in prop::collection::vec((0u32..=12).prop_map(|j| j as f64 / 4.0), 1..=6),
    ) {
        let cfg = ToleranceConfig::default();
        let spec = DiagonalSpec::on_sequence(d).unwrap();
        let verdict = check_power_inequality(&spec.as_operator(), 4, &cfg).unwrap();
        let holds = matches!(verdict, PowerInequalityVerdict::Holds { .. });
        prop_assert!(holds);
    }
}
