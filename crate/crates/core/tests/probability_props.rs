mod common;

use bqc::probability::{Joint, RegisterSplit};
use common::random_state;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn chain_rule_and_bayes(seed in any::<u64>(), n in 1usize..5, m in 1usize..4) {
        let state = random_state(&mut ChaCha8Rng::seed_from_u64(seed), n + m);
        let split = RegisterSplit::new(n, m);
        let joint = Joint::from_state(&state, split).unwrap();
        let prior = joint.prior();
        let marginal = joint.data_marginal();
        prop_assert!((prior.total() - 1.0).abs() <= 1e-9);
        prop_assert!((marginal.total() - 1.0).abs() <= 1e-9);
        for l in 0..split.latent_dim() {
            if prior.probs()[l] <= 1e-12 {
                continue;
            }
            let lik = joint.likelihood(l).unwrap();
            for x in 0..split.data_dim() {
                let chain = prior.probs()[l] * lik.probs()[x];
                prop_assert!((joint.get(x, l) - chain).abs() <= 1e-10);
                if marginal.probs()[x] > 1e-12 {
                    let post = joint.posterior(x).unwrap();
                    prop_assert!((post.probs()[l] * marginal.probs()[x] - chain).abs() <= 1e-10);
                }
            }
        }
    }
}
