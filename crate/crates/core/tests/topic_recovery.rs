use crisisnet_core::topics::{self, LdaConfig, SelectionConfig};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two topics with disjoint 10-word supports over a 20-word vocabulary;
/// per-document mixtures drawn from a flat Dirichlet.
fn synthetic_corpus(seed: u64, docs: usize, len: usize) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..docs)
        .map(|_| {
            let share: f64 = rng.gen();
            (0..len)
                .map(|_| {
                    let topic = usize::from(rng.gen::<f64>() >= share);
                    topic * 10 + rng.gen_range(0..10)
                })
                .collect()
        })
        .collect()
}

fn top5(phi: &[f64]) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..phi.len()).collect();
    ids.sort_by(|&a, &b| phi[b].total_cmp(&phi[a]).then(a.cmp(&b)));
    ids.truncate(5);
    ids
}

/// Best matching of learned to true topics by top-5 overlap.
fn min_overlap(phi: &[Vec<f64>]) -> usize {
    let overlap = |t: usize, truth: usize| {
        top5(&phi[t]).iter().filter(|&&w| w / 10 == truth).count()
    };
    let straight = overlap(0, 0).min(overlap(1, 1));
    let crossed = overlap(0, 1).min(overlap(1, 0));
    straight.max(crossed)
}

#[test]
fn recovers_two_disjoint_topics() {
    let mut wins = 0;
    for seed in 0..10u64 {
        let docs = synthetic_corpus(1000 + seed, 200, 30);
        let config = LdaConfig::with_defaults(2, 200, seed);
        let state = topics::fit(docs, 20, &config).unwrap();
        let post = topics::posterior(&state, config.alpha, config.beta);
        if min_overlap(&post.phi) >= 4 {
            wins += 1;
        }
    }
    assert!(wins >= 9, "recovered in {wins}/10 seeds");
}

#[test]
fn coherence_selects_two_topics() {
    let mut wins = 0;
    for seed in 0..10u64 {
        let docs = synthetic_corpus(2000 + seed, 200, 30);
        let selection = SelectionConfig {
            ks: (1..=5).collect(),
            alpha: None,
            beta: 0.01,
            sweeps: 200,
            seed,
            coherence_words: 10,
        };
        let out = topics::select_topic_count(&docs, 20, &selection).unwrap();
        if out.best_k == 2 {
            wins += 1;
        }
    }
    assert!(wins >= 8, "K=2 chosen in {wins}/10 seeds");
}
