use goodcodes::ack::{ackermann, alpha, f_star, lambda_d, LambdaTable};
use goodcodes::bounds::{
    check_fstar_lemma, depth_chain_certificate, depth_lower_bound, lb_depth1, lb_refined,
    ChainConfig, LowerBoundParams,
};
use goodcodes::ledger::{upper_bound_ledger, ConstantTable};
use goodcodes::Exact;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Exact {
    Exact::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: u64) -> Exact {
    Exact::from_integer(BigInt::from(n))
}

/// `λ_d` straight from the recursive definition, without memoization.
fn oracle_lambda(d: u32, n: u64) -> u64 {
    match d {
        1 => (0..=n).take_while(|k| k * k <= n).last().unwrap(),
        2 => (0..64).find(|&k| 1u128 << k >= u128::from(n)).unwrap(),
        _ => {
            let (mut cur, mut steps) = (n, 0);
            while cur > 1 {
                cur = oracle_lambda(d - 2, cur);
                steps += 1;
            }
            steps
        }
    }
}

proptest! {
    #[test]
    fn lambda_matches_definition(d in 1u32..10, n in 1u64..200_000) {
        prop_assert_eq!(lambda_d(d, n).unwrap(), oracle_lambda(d, n));
    }

    #[test]
    fn lambda_monotone_in_n(d in 1u32..12, n in 1u64..1_000_000) {
        prop_assert!(lambda_d(d, n).unwrap() <= lambda_d(d, n + 1).unwrap());
    }

    #[test]
    fn lambda_nonincreasing_in_step_of_two(d in 1u32..12, n in 2u64..1_000_000) {
        prop_assert!(lambda_d(d + 2, n).unwrap() <= lambda_d(d, n).unwrap());
    }

    #[test]
    fn lambda_is_fstar_of_previous(d in 3u32..12, n in 1u64..1_000_000) {
        let via = f_star(|m| lambda_d(d - 2, m).unwrap(), n).unwrap();
        prop_assert_eq!(lambda_d(d, n).unwrap(), via);
    }

    #[test]
    fn alpha_is_least_even_depth(n in 1u64..u64::MAX / 2) {
        let a = alpha(n).unwrap();
        prop_assert_eq!(a % 2, 0);
        prop_assert!(lambda_d(a, n).unwrap() <= 6);
        if a > 2 {
            prop_assert!(lambda_d(a - 2, n).unwrap() > 6);
        }
        prop_assert!(depth_lower_bound(n).unwrap() <= a);
    }

    #[test]
    fn lb_depth1_is_eps_delta_squared_nr(n in 1u64..10_000, r_frac in 0.0f64..1.0, a in 1i64..20, b in 1i64..20) {
        let r = ((n as f64 * r_frac) as u64).clamp(1, n);
        let (eps, delta) = (q(1, a), q(1, b));
        let got = lb_depth1(n, r, eps.clone(), delta.clone()).unwrap();
        prop_assert_eq!(got, eps * delta.clone() * delta * int(n) * int(r));
    }
}

#[test]
fn ackermann_rows() {
    for j in 1..=10u64 {
        assert_eq!(ackermann(0, j).unwrap().finite(), Some(2 * j));
        assert_eq!(ackermann(1, j).unwrap().finite(), Some(1 << j));
    }
    assert_eq!(ackermann(2, 4).unwrap().finite(), Some(65536));
    assert!(ackermann(2, 5).unwrap().is_huge());
    assert!(ackermann(3, 4).unwrap().is_huge());
    assert!(ackermann(1, 0).is_err());
}

#[test]
fn table_agrees_with_direct() {
    let t = LambdaTable::new(8, 5000);
    for d in 1..=8 {
        for n in 1..=5000 {
            assert_eq!(t.get(d, n), lambda_d(d, n).unwrap());
        }
    }
}

#[test]
fn unit_ledger_replay() {
    let ct = ConstantTable::<Exact>::unit();
    let l = upper_bound_ledger(1024, 4, &ct).unwrap();
    assert_eq!(*l.total(), int(12288));
    assert_eq!(l.leaf_sum(), *l.total());
}

fn per_n_by_depth(n: u64, ct: &ConstantTable<Exact>) -> Vec<Exact> {
    [4u32, 6, 8, 10, 12]
        .iter()
        .map(|&d| {
            let l = upper_bound_ledger(n, d, ct).unwrap();
            assert_eq!(l.leaf_sum(), *l.total(), "n={n} d={d}");
            if ct.constraints_hold() {
                let cap = int(3) * l.c.clone() * int(lambda_d(d, n).unwrap()) * int(n);
                assert!(*l.total() <= cap, "n={n} d={d}: {} > {cap}", l.total());
            }
            l.total().clone() / int(n)
        })
        .collect()
}

#[test]
fn ledger_total_per_n_nonincreasing_in_depth() {
    for ct in [ConstantTable::<Exact>::new_default(), ConstantTable::unit()] {
        for e in 10..=16u32 {
            let n = 1u64 << e;
            let v = per_n_by_depth(n, &ct);
            assert!(v.windows(2).all(|w| w[1] <= w[0]), "n={n}: {v:?}");
        }
    }
}

#[test]
fn ledger_rows_and_csv() {
    let ct = ConstantTable::<Exact>::unit();
    let l = upper_bound_ledger(4096, 6, &ct).unwrap();
    let rows = l.rows();
    assert_eq!(rows.len(), l.nodes().len());
    let csv = l.to_csv();
    assert_eq!(csv.lines().next(), Some("step,params,wires"));
    assert_eq!(csv.lines().count(), rows.len() + 1);
    assert!(upper_bound_ledger(4096, 5, &ct).is_err());
    assert!(upper_bound_ledger(4096, 2, &ct).is_err());
}

#[test]
fn default_constants_derive_c() {
    let ct = ConstantTable::<Exact>::new_default();
    assert!(ct.validate().is_ok());
    assert!(ct.constraints_hold());
    // max(c1·D + ⌈log2 6⌉²·c3, 2(2c1·D1 + c4 + c5), c6) with D = 2c2·max(D1, D2) = 2.
    assert_eq!(ct.required_c(), int(11));
    let mut bad = ConstantTable::<Exact>::new_default();
    bad.c0 = int(5);
    assert!(bad.validate().is_err());
}

#[test]
fn refined_bound_halves_with_depth() {
    let p3 = LowerBoundParams::with_default_omega(1000, 3, 100, q(1, 2), q(1, 4)).unwrap();
    let p5 = LowerBoundParams::with_default_omega(1000, 5, 100, q(1, 2), q(1, 4)).unwrap();
    let (a, b) = (lb_refined(&p3), lb_refined(&p5));
    let (l3, l5) = (lambda_d(3, 100).unwrap(), lambda_d(5, 100).unwrap());
    assert_eq!(a.clone() * int(l5), b * int(l3) * int(2));
    assert!(a > Exact::from_integer(BigInt::from(0)));
    assert!(LowerBoundParams::with_default_omega(10, 3, 11, Exact::one(), Exact::one()).is_err());
    assert!(LowerBoundParams::with_default_omega(10, 0, 5, Exact::one(), Exact::one()).is_err());
}

#[test]
fn fstar_small_range() {
    let r = check_fstar_lemma(100_000).unwrap();
    assert!(r.violation.is_none());
    assert!(r.checked_pairs > 0);
    assert!(check_fstar_lemma(100_000_000).is_err());
}

#[test]
fn chain_certificate_grid() {
    let cfg = ChainConfig::default();
    for n in [4u64, 16, 64, 65, 1000, 1 << 16, 1 << 20, 1 << 40] {
        let c = depth_chain_certificate(n, &cfg).unwrap();
        assert!(c.all_hold, "n={n}");
        assert!(c.depth_lower_bound <= c.alpha);
        assert_eq!(c.alpha, alpha(n).unwrap());
        assert!(c.rho_prime.to_f64().unwrap() > 0.0);
    }
}
