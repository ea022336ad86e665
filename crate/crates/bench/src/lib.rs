//! Inputs shared by the benchmarks.

use causal_core::number::rational;
use causal_core::sampling::random_causal;
use causal_core::{enumerate_causal_vertices, Correlation, EnumerationOptions, Scenario, VertexSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn vertices(s: &Scenario) -> VertexSet {
    enumerate_causal_vertices(s, &EnumerationOptions::default()).expect("small scenario")
}

/// Causal points (random constructions) followed by noncausal ones (each
/// mixed with the uniform table so that the LP has to work for it).
pub fn membership_points(v: &VertexSet, n: usize, seed: u64) -> Vec<Correlation> {
    let s = v.scenario();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Correlation> = (0..n).map(|_| random_causal(&mut rng, s, 4).expect("tripartite")).collect();
    let uniform = Correlation::uniform(s.clone());
    out.extend(causal_core::strategy::all_strategies(s).expect("small scenario").step_by(97).take(n).map(|st| {
        Correlation::mix(&[st.to_correlation(), uniform.clone()], &[rational(3, 4), rational(1, 4)]).expect("same scenario")
    }));
    out
}
