//! Random causal correlations assembled from the decompositions that
//! define causality, plus a post-selection counterexample.
//!
//! All weights are rationals with denominators built from `den`, so the
//! results stay small enough for exact membership tests.

use num_bigint::BigInt;
use rand::Rng;

use crate::correlation::Correlation;
use crate::error::{Error, Result};
use crate::number::Rational;
use crate::scenario::{PartySpec, Scenario};

/// `m` nonnegative rational weights summing to one, each a multiple of
/// `1/Σ`, with numerators drawn from `0..=den`.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, m: usize, den: u32) -> Vec<Rational> {
    assert!(m > 0, "need at least one weight");
    let den = den.max(1);
    let mut w: Vec<u32> = (0..m).map(|_| rng.gen_range(0..=den)).collect();
    if w.iter().all(|&v| v == 0) {
        w[rng.gen_range(0..m)] = 1;
    }
    let total: u32 = w.iter().sum();
    w.into_iter().map(|v| Rational::new(BigInt::from(v), BigInt::from(total))).collect()
}

/// Independent random output distribution for every input of one party.
pub fn random_single_party<R: Rng + ?Sized>(rng: &mut R, spec: &PartySpec, den: u32) -> Correlation {
    let scenario = Scenario::new(vec![spec.clone()]).expect("a party spec is a valid scenario");
    let mut table = Vec::with_capacity(scenario.num_entries());
    for &m in &spec.outputs {
        table.extend(random_weights(rng, m, den));
    }
    Correlation::new(scenario, table).expect("weights are normalized")
}

/// Mixture of the terms produced by `term` for a random nonempty subset of
/// `0..count`, with random weights.
fn random_mixture<R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    den: u32,
    mut term: impl FnMut(&mut R, usize) -> Result<Correlation>,
) -> Result<Correlation> {
    let mut chosen: Vec<usize> = (0..count).filter(|_| rng.gen_bool(0.5)).collect();
    if chosen.is_empty() {
        chosen.push(rng.gen_range(0..count));
    }
    let weights = random_weights(rng, chosen.len(), den);
    let terms = chosen.into_iter().map(|i| term(rng, i)).collect::<Result<Vec<_>>>()?;
    Correlation::mix(&terms, &weights)
}

fn complement(n: usize, set: &[usize]) -> Vec<usize> {
    (0..n).filter(|k| !set.contains(k)).collect()
}

/// Random causal correlation from the recursive definition: some party
/// acts first with a random local distribution and, for each of its
/// inputs and outputs, the others share a random causal correlation.
pub fn random_causal<R: Rng + ?Sized>(rng: &mut R, scenario: &Scenario, den: u32) -> Result<Correlation> {
    let n = scenario.num_parties();
    if n == 1 {
        return Ok(random_single_party(rng, &scenario.parties()[0], den));
    }
    random_mixture(rng, n, den, |rng, k| {
        let first = random_single_party(rng, &scenario.parties()[k], den);
        let rest = scenario.restrict(&complement(n, &[k]))?;
        compose(rng, scenario, &[k], &first, |rng| random_causal(rng, &rest, den))
    })
}

/// Random causal correlation in the subset form: a causal correlation on a
/// nonempty strict subset `K`, followed by conditional causal correlations
/// on the complement, mixed over several `K`.
pub fn random_subset_form<R: Rng + ?Sized>(rng: &mut R, scenario: &Scenario, den: u32) -> Result<Correlation> {
    let n = scenario.num_parties();
    if n < 2 {
        return Err(Error::InvalidArgument("the subset form needs at least two parties".into()));
    }
    let subsets: Vec<Vec<usize>> =
        (1..(1usize << n) - 1).map(|mask| (0..n).filter(|k| mask >> k & 1 == 1).collect()).collect();
    random_mixture(rng, subsets.len(), den, |rng, i| {
        let k_set = &subsets[i];
        let rest = scenario.restrict(&complement(n, k_set))?;
        let first = random_causal(rng, &scenario.restrict(k_set)?, den)?;
        compose(rng, scenario, k_set, &first, |rng| random_causal(rng, &rest, den))
    })
}

/// Random causal correlation in the party-last form: a causal correlation
/// on all parties but `k`, then a local distribution for `k` that may
/// depend on everything before it.
pub fn random_party_last<R: Rng + ?Sized>(rng: &mut R, scenario: &Scenario, den: u32) -> Result<Correlation> {
    let n = scenario.num_parties();
    if n < 2 {
        return Err(Error::InvalidArgument("the party-last form needs at least two parties".into()));
    }
    random_mixture(rng, n, den, |rng, k| {
        let before = complement(n, &[k]);
        let first = random_causal(rng, &scenario.restrict(&before)?, den)?;
        let spec = scenario.parties()[k].clone();
        compose(rng, scenario, &before, &first, |rng| Ok(random_single_party(rng, &spec, den)))
    })
}

fn compose<R: Rng + ?Sized>(
    rng: &mut R,
    scenario: &Scenario,
    first_parties: &[usize],
    first: &Correlation,
    mut second: impl FnMut(&mut R) -> Result<Correlation>,
) -> Result<Correlation> {
    let mut failure = None;
    let out = Correlation::sequential_compose(scenario, first_parties, first, |_, _| match second(rng) {
        Ok(c) => Some(c),
        Err(e) => {
            failure = Some(e);
            None
        }
    });
    match failure {
        Some(e) => Err(e),
        None => out,
    }
}

/// Tripartite correlation established in the order `A, B ≺ C`: A and B
/// output uniformly random bits, and C (one input, two outputs) outputs 1
/// iff `a = y` and `b = x`. Post-selecting on `c = 1` leaves a bipartite
/// correlation that wins the guess-your-neighbour's-input game perfectly.
pub fn postselection_example() -> Correlation {
    let binary = PartySpec::new(vec![2, 2]);
    let scenario = Scenario::new(vec![binary.clone(), binary, PartySpec::new(vec![2])]).expect("valid scenario");
    Correlation::from_fn(scenario, |x, a| {
        let win = usize::from(a[0] == x[1] && a[1] == x[0]);
        if a[2] == win {
            Rational::new(BigInt::from(1), BigInt::from(4))
        } else {
            Rational::new(BigInt::from(0), BigInt::from(1))
        }
    })
    .expect("normalized by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::membership::is_causal;
    use crate::number::int;
    use crate::strategy::{enumerate_causal_vertices, EnumerationOptions};
    use crate::PostSelection;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn weights_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in 1..6 {
            let w = random_weights(&mut rng, m, 3);
            assert_eq!(w.len(), m);
            assert_eq!(w.iter().fold(int(0), |s, v| s + v), int(1));
        }
    }

    #[test]
    fn constructions_are_causal_on_lazy_tripartite() {
        let s = Scenario::lazy(3);
        let v = enumerate_causal_vertices(&s, &EnumerationOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            for c in [
                random_causal(&mut rng, &s, 3).unwrap(),
                random_subset_form(&mut rng, &s, 3).unwrap(),
                random_party_last(&mut rng, &s, 3).unwrap(),
            ] {
                assert!(is_causal(&c, &v).unwrap().is_causal());
            }
        }
    }

    #[test]
    fn forms_need_two_parties() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = Scenario::lazy(1);
        assert!(random_causal(&mut rng, &s, 2).is_ok());
        assert!(random_subset_form(&mut rng, &s, 2).is_err());
        assert!(random_party_last(&mut rng, &s, 2).is_err());
    }

    #[test]
    fn postselection_breaks_causality() {
        let p = postselection_example();
        let v = enumerate_causal_vertices(p.scenario(), &EnumerationOptions::default()).unwrap();
        assert!(is_causal(&p, &v).unwrap().is_causal());
        let q = p.postselect_output(2, 0, 1, PostSelection::MayBreakCausality).unwrap();
        let vq = enumerate_causal_vertices(q.scenario(), &EnumerationOptions::default()).unwrap();
        assert!(!is_causal(&q, &vq).unwrap().is_causal());
    }
}
