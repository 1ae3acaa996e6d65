use goodcodes::circuit::{random_circuit, LinearCircuit, NodeRef};
use goodcodes::gf::{Field, Matrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn field(q: u64) -> Field {
    Field::from_order(q).unwrap()
}

/// Evaluates gate by gate from the JSON-level structure, independent of the
/// library's evaluator.
fn naive_eval(c: &LinearCircuit, x: &[u64]) -> Vec<u64> {
    let f = c.field();
    let mut values: Vec<Vec<u64>> = vec![x.to_vec()];
    for layer in c.layers() {
        let row = layer
            .iter()
            .map(|g| {
                g.iter().fold(0, |acc, w| {
                    f.add(acc, f.mul(w.coeff, values[w.src.layer][w.src.index]))
                })
            })
            .collect();
        values.push(row);
    }
    c.outputs()
        .iter()
        .map(|o: &NodeRef| values[o.layer][o.index])
        .collect()
}

fn circuit_with(seed: u64, q: u64, n: usize, widths: &[usize], m: usize) -> LinearCircuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_circuit(&mut rng, field(q), n, widths, m, 0.4)
}

fn random_input(seed: u64, q: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (0..n).map(|_| rng.gen_range(0..q)).collect()
}

fn arb_shape() -> impl Strategy<Value = (u64, u64, usize, Vec<usize>, usize)> {
    (
        any::<u64>(),
        prop::sample::select(vec![2u64, 3, 5, 7]),
        1usize..8,
        prop::collection::vec(1usize..6, 1..4),
        1usize..6,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eval_matches_naive_and_matrix((seed, q, n, widths, m) in arb_shape()) {
        let c = circuit_with(seed, q, n, &widths, m);
        let x = random_input(seed, q, n);
        let y = c.eval(&x).unwrap();
        prop_assert_eq!(&y, &naive_eval(&c, &x));
        prop_assert_eq!(y, c.generator_matrix().left_mul_vec(&x).unwrap());
    }

    #[test]
    fn eval_is_linear((seed, q, n, widths, m) in arb_shape(), a in 0u64..7) {
        let c = circuit_with(seed, q, n, &widths, m);
        let f = c.field();
        let a = f.reduce(a);
        let x = random_input(seed, q, n);
        let y = random_input(seed.wrapping_add(1), q, n);
        let combo: Vec<u64> = x.iter().zip(&y).map(|(&u, &v)| f.add(f.mul(a, u), v)).collect();
        let cx = c.eval(&x).unwrap();
        let cy = c.eval(&y).unwrap();
        let expect: Vec<u64> = cx.iter().zip(&cy).map(|(&u, &v)| f.add(f.mul(a, u), v)).collect();
        prop_assert_eq!(c.eval(&combo).unwrap(), expect);
    }

    #[test]
    fn stack_is_function_composition((seed, q, n, widths, m) in arb_shape(), k in 1usize..5) {
        let top = circuit_with(seed, q, n, &widths, m);
        let bottom = circuit_with(seed.wrapping_mul(3), q, m, &[k + 1], k);
        let s = LinearCircuit::stack(&top, &bottom).unwrap();
        prop_assert_eq!(s.depth(), top.depth() + bottom.depth());
        let x = random_input(seed, q, n);
        prop_assert_eq!(s.eval(&x).unwrap(), bottom.eval(&top.eval(&x).unwrap()).unwrap());
        let prod = top.generator_matrix().mul(&bottom.generator_matrix()).unwrap();
        prop_assert_eq!(s.generator_matrix(), prod);
    }

    #[test]
    fn collapse_prune_and_canonical_preserve_eval((seed, q, n, widths, m) in arb_shape()) {
        let c = circuit_with(seed, q, n, &widths, m);
        let x = random_input(seed, q, n);
        let y = c.eval(&x).unwrap();
        prop_assert_eq!(&c.prune_dead_gates().eval(&x).unwrap(), &y);
        prop_assert_eq!(&c.canonicalize().eval(&x).unwrap(), &y);
        if c.depth() >= 2 {
            let k = c.collapse_last_layer().unwrap();
            // Pruning can drop further layers that no output reaches.
            prop_assert!(k.depth() < c.depth());
            prop_assert_eq!(&k.eval(&x).unwrap(), &y);
        }
    }

    #[test]
    fn json_round_trip((seed, q, n, widths, m) in arb_shape()) {
        let c = circuit_with(seed, q, n, &widths, m);
        let text = serde_json::to_string(&c).unwrap();
        let back: LinearCircuit = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), text);
        let x = random_input(seed, q, n);
        prop_assert_eq!(back.eval(&x).unwrap(), c.eval(&x).unwrap());
    }

    #[test]
    fn skeleton_reassignment_keeps_shape((seed, q, n, widths, m) in arb_shape()) {
        let c = circuit_with(seed, q, n, &widths, m);
        let s = c.skeleton();
        let again = goodcodes::circuit::assign_random_coefficients(&s, c.field(), seed).unwrap();
        prop_assert_eq!(again.depth(), c.depth());
        prop_assert_eq!(again.num_outputs(), c.num_outputs());
        // Zero draws delete wires, so the new wiring is a sub-skeleton.
        let t = again.skeleton();
        for (l, layer) in t.layers.iter().enumerate() {
            for (g, srcs) in layer.iter().enumerate() {
                prop_assert!(srcs.iter().all(|w| s.layers[l][g].contains(w)));
            }
        }
        prop_assert!(t.wire_count() <= s.wire_count());
    }

    #[test]
    fn det_is_multiplicative(seed in any::<u64>(), k in 1usize..5, q in prop::sample::select(vec![2u64, 5, 7, 11])) {
        let f = field(q);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rand_matrix = || {
            let rows = (0..k).map(|_| (0..k).map(|_| rng.gen_range(0..q)).collect()).collect();
            Matrix::from_rows(f, rows).unwrap()
        };
        let (a, b) = (rand_matrix(), rand_matrix());
        let ab = a.mul(&b).unwrap();
        prop_assert_eq!(ab.det().unwrap(), f.mul(a.det().unwrap(), b.det().unwrap()));
        prop_assert_eq!(a.det().unwrap() != 0, a.rank() == k);
        prop_assert_eq!(a.transpose().rank(), a.rank());
    }
}

#[test]
fn malformed_circuits_are_rejected() {
    let forward = r#"{"field":"gf2","num_inputs":2,"layers":[[[[1,0,1]]]],"outputs":[[1,0]]}"#;
    assert!(serde_json::from_str::<LinearCircuit>(forward).is_err());
    let out_of_range = r#"{"field":"gf2","num_inputs":2,"layers":[[[[0,5,1]]]],"outputs":[[1,0]]}"#;
    assert!(serde_json::from_str::<LinearCircuit>(out_of_range).is_err());
    let bad_coeff =
        r#"{"field":{"prime":5},"num_inputs":2,"layers":[[[[0,0,9]]]],"outputs":[[1,0]]}"#;
    assert!(serde_json::from_str::<LinearCircuit>(bad_coeff).is_err());
    let bad_field = r#"{"field":{"prime":6},"num_inputs":1,"layers":[],"outputs":[[0,0]]}"#;
    assert!(serde_json::from_str::<LinearCircuit>(bad_field).is_err());
}

#[test]
fn dot_has_one_rank_per_layer() {
    let c = circuit_with(3, 5, 3, &[2, 2], 2);
    let dot = c.to_dot();
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("rank=same").count(), c.depth() + 1);
}
