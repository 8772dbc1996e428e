use std::sync::Arc;

use infoskel::data::{read_csv, BayesNetSpec, CsvOptions, ExactModel, JointSource, NodeSpec};
use infoskel::info::{channel_capacity, mutual_information, path_information, DEFAULT_BA_MAX_ITER, DEFAULT_BA_TOL};
use infoskel::interval::jeffreys_interval;
use infoskel::tensor::{
    apply, compose, dagger, transition_tensor, Alphabet, Direction, JointDistribution, Pmf, StochasticTensor,
};
use proptest::prelude::*;

fn row(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, len).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    })
}

fn tensor(n: usize, m: usize) -> impl Strategy<Value = StochasticTensor> {
    prop::collection::vec(row(m), n).prop_map(|rows| StochasticTensor::from_rows(rows).unwrap())
}

fn pmf(n: usize) -> impl Strategy<Value = Pmf> {
    row(n).prop_map(move |p| Pmf::new(Arc::new(Alphabet::indexed(n)), p).unwrap())
}

fn tensor_with_input() -> impl Strategy<Value = (StochasticTensor, Pmf)> {
    (2usize..5, 2usize..5).prop_flat_map(|(n, m)| (tensor(n, m), pmf(n)))
}

fn counts() -> impl Strategy<Value = Vec<Vec<u64>>> {
    (1usize..5, 1usize..5).prop_flat_map(|(n, m)| prop::collection::vec(prop::collection::vec(0u64..40, m), n))
}

fn chain(cx: usize, cy: usize, cz: usize) -> impl Strategy<Value = BayesNetSpec> {
    (row(cx), prop::collection::vec(row(cy), cx), prop::collection::vec(row(cz), cy)).prop_map(
        move |(root, xy, yz)| {
            let node = |name: &str, card: usize, parents: &[&str], cpt: Vec<Vec<f64>>| NodeSpec {
                name: name.into(),
                alphabet: (0..card).map(|i| format!("{name}{i}")).collect(),
                parents: parents.iter().map(|p| p.to_string()).collect(),
                cpt,
            };
            BayesNetSpec {
                nodes: vec![
                    node("X", cx, &[], vec![root]),
                    node("Y", cy, &["X"], xy),
                    node("Z", cz, &["Y"], yz),
                ],
            }
        },
    )
}

fn any_chain() -> impl Strategy<Value = BayesNetSpec> {
    (2usize..4, 2usize..4, 2usize..4).prop_flat_map(|(a, b, c)| chain(a, b, c))
}

fn permute_tensor(t: &StochasticTensor, rows: &[usize], cols: &[usize]) -> StochasticTensor {
    StochasticTensor::from_rows(
        rows.iter()
            .map(|&r| cols.iter().map(|&c| t.get(r, c)).collect())
            .collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn estimated_tensors_are_stochastic_and_bracketed(c in counts()) {
        let n = c.len();
        let m = c[0].len();
        prop_assume!(c.iter().flatten().sum::<u64>() > 0);
        let joint = JointDistribution::from_counts(
            Arc::new(Alphabet::indexed(n)),
            Arc::new(Alphabet::indexed(m)),
            c,
        ).unwrap();
        for dir in [Direction::Forward, Direction::Reverse] {
            let est = transition_tensor(&joint, dir, 0.05).unwrap();
            for (x, r) in est.tensor.rows().iter().enumerate() {
                prop_assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                for (y, &p) in r.iter().enumerate() {
                    prop_assert!(0.0 <= est.ci_low[x][y] && est.ci_high[x][y] <= 1.0);
                    prop_assert!(est.ci_low[x][y] <= p + 1e-12 && p <= est.ci_high[x][y] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn composition_is_associative(
        (a, b, c) in (2usize..5, 2usize..5, 2usize..5, 2usize..5)
            .prop_flat_map(|(n, m, k, l)| (tensor(n, m), tensor(m, k), tensor(k, l)))
    ) {
        let left = compose(&compose(&a, &b).unwrap(), &c).unwrap();
        let right = compose(&a, &compose(&b, &c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) <= 1e-12);
    }

    #[test]
    fn composed_rows_stay_stochastic(
        (a, b) in (2usize..6, 2usize..6, 2usize..6).prop_flat_map(|(n, m, k)| (tensor(n, m), tensor(m, k)))
    ) {
        for r in compose(&a, &b).unwrap().rows() {
            prop_assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dagger_is_an_involution((t, p) in tensor_with_input()) {
        let out = apply(&t, &p).unwrap();
        let back = dagger(&t, &p).unwrap();
        prop_assert!(back.degenerate_rows.is_empty());
        let again = dagger(&back.tensor, &out).unwrap();
        prop_assert!(again.tensor.max_abs_diff(&t) <= 1e-12);
    }

    #[test]
    fn population_chain_satisfies_composition(spec in any_chain()) {
        let m = ExactModel::from_spec(&spec).unwrap();
        let t = |a: usize, b: usize| {
            transition_tensor(&m.joint(&[a], &[b]).unwrap(), Direction::Forward, 0.05).unwrap().tensor
        };
        let composed = compose(&t(0, 1), &t(1, 2)).unwrap();
        prop_assert!(t(0, 2).max_abs_diff(&composed) <= 1e-12);
        // and backwards, through the reversed tensors
        let back = compose(&t(2, 1), &t(1, 0)).unwrap();
        prop_assert!(t(2, 0).max_abs_diff(&back) <= 1e-12);
    }

    #[test]
    fn jeffreys_width_shrinks_with_more_data(k in 0u64..50, extra in 0u64..50) {
        let n = k + extra + 1;
        let small = jeffreys_interval(k, n, 0.05).unwrap();
        let large = jeffreys_interval(4 * k, 4 * n, 0.05).unwrap();
        prop_assert!(large.width() < small.width());
    }

    #[test]
    fn fork_traversal_is_symmetric(
        (p_y, y_to_x, y_to_z) in (2usize..5, 2usize..5, 2usize..5)
            .prop_flat_map(|(cy, cx, cz)| (pmf(cy), tensor(cy, cx), tensor(cy, cz)))
    ) {
        let p_x = apply(&y_to_x, &p_y).unwrap();
        let p_z = apply(&y_to_z, &p_y).unwrap();
        let x_to_y = dagger(&y_to_x, &p_y).unwrap().tensor;
        let z_to_y = dagger(&y_to_z, &p_y).unwrap().tensor;
        let (fwd, _) = path_information(&p_x, &[x_to_y, y_to_z.clone()]).unwrap();
        let (rev, _) = path_information(&p_z, &[z_to_y, y_to_x]).unwrap();
        prop_assert!((fwd.value() - rev.value()).abs() <= 1e-9);
    }

    #[test]
    fn capacity_bounds_mutual_information((t, p) in tensor_with_input()) {
        let cap = channel_capacity(&t, DEFAULT_BA_TOL, DEFAULT_BA_MAX_ITER);
        let mi = mutual_information(&t.joint_with(&p).unwrap());
        prop_assert!(cap.converged || cap.iterations == DEFAULT_BA_MAX_ITER);
        prop_assert!(cap.capacity.value() + 1e-9 >= mi.value());
        let bound = (t.n_inputs().min(t.n_outputs()) as f64).log2();
        prop_assert!(cap.capacity.value() <= bound + 1e-12);
        prop_assert!(cap.capacity.value() >= 0.0);
    }

    #[test]
    fn capacity_ignores_symbol_order(
        (t, rp, cp) in (2usize..5, 2usize..5).prop_flat_map(|(n, m)| (
            tensor(n, m),
            Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            Just((0..m).collect::<Vec<_>>()).prop_shuffle(),
        ))
    ) {
        let c = |t: &StochasticTensor| channel_capacity(t, 1e-12, 100_000).capacity.value();
        prop_assert!((c(&t) - c(&permute_tensor(&t, &rp, &cp))).abs() <= 1e-9);
    }

    #[test]
    fn single_edge_path_information_is_mutual_information((t, p) in tensor_with_input()) {
        let (bits, _) = path_information(&p, std::slice::from_ref(&t)).unwrap();
        let mi = mutual_information(&t.joint_with(&p).unwrap());
        prop_assert!((bits.value() - mi.value()).abs() <= 1e-12);
    }

    #[test]
    fn mutual_information_is_bounded_by_entropies((t, p) in tensor_with_input()) {
        let joint = t.joint_with(&p).unwrap();
        let mi = mutual_information(&joint).value();
        prop_assert!(mi >= 0.0);
        prop_assert!(mi <= joint.marginal_x().entropy().min(joint.marginal_y().entropy()) + 1e-12);
    }

    #[test]
    fn path_information_obeys_processing_inequality(
        (p, a, b) in (2usize..5, 2usize..5, 2usize..5)
            .prop_flat_map(|(n, m, k)| (pmf(n), tensor(n, m), tensor(m, k)))
    ) {
        let (one, _) = path_information(&p, std::slice::from_ref(&a)).unwrap();
        let (two, _) = path_information(&p, &[a, b]).unwrap();
        prop_assert!(two.value() <= one.value() + 1e-12);
    }

    #[test]
    fn sampling_is_seed_deterministic(spec in any_chain(), seed in any::<u64>()) {
        let net = spec.compile().unwrap();
        let a = net.sample(50, seed).unwrap();
        let b = net.sample(50, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn csv_round_trip_preserves_dataset(spec in any_chain(), seed in any::<u64>()) {
        let data = spec.compile().unwrap().sample(30, seed).unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf, b';').unwrap();
        let opts = CsvOptions { delimiter: b';', ..CsvOptions::default() };
        let back = read_csv(buf.as_slice(), &opts).unwrap();
        prop_assert_eq!(back.names(), data.names());
        for v in 0..data.n_variables() {
            // symbols absent from the sample drop out of the reloaded alphabet
            for (a, b) in data.column(v).iter().zip(back.column(v)) {
                prop_assert_eq!(data.alphabet(v).symbol(*a as usize), back.alphabet(v).symbol(*b as usize));
            }
        }
        let mut again = Vec::new();
        back.write_csv(&mut again, b';').unwrap();
        prop_assert_eq!(&read_csv(again.as_slice(), &opts).unwrap(), &back);
        prop_assert_eq!(again, buf);
    }

    #[test]
    fn exact_marginals_agree_across_pairs(spec in any_chain()) {
        let m = ExactModel::from_spec(&spec).unwrap();
        let via_xy = m.joint(&[0], &[1]).unwrap().marginal_y();
        let via_yz = m.joint(&[1], &[2]).unwrap().marginal_x();
        for (a, b) in via_xy.probabilities().iter().zip(via_yz.probabilities()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        prop_assert_eq!(m.variable_names().len(), 3);
    }
}
