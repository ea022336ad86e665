//! Randomized closure checks shared by the property tests and the
//! acceptance harness. Each check draws one instance from `rng` and returns
//! whether the expected membership verdict came out.

#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use causal_core::membership::is_causal;
use causal_core::number::Rational;
use causal_core::sampling::{random_causal, random_party_last, random_subset_form, random_weights};
use causal_core::{enumerate_causal_vertices, Correlation, EnumerationOptions, PartySpec, PostSelection, Scenario, VertexSet};
use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const DEN: u32 = 3;

#[derive(Default)]
pub struct Checker {
    vertices: Mutex<HashMap<Scenario, Arc<VertexSet>>>,
}

impl Checker {
    pub fn vertices(&self, s: &Scenario) -> Arc<VertexSet> {
        let mut cache = self.vertices.lock().unwrap();
        cache
            .entry(s.clone())
            .or_insert_with(|| Arc::new(enumerate_causal_vertices(s, &EnumerationOptions::default()).unwrap()))
            .clone()
    }

    pub fn causal(&self, c: &Correlation) -> bool {
        is_causal(c, &self.vertices(c.scenario())).unwrap().is_causal()
    }
}

/// Small scenarios of two or three parties, including uneven alphabets.
pub fn scenarios() -> Vec<Scenario> {
    vec![
        Scenario::lazy(2),
        Scenario::full_binary(2),
        Scenario::lazy(3),
        Scenario::new(vec![PartySpec::new(vec![2, 3]), PartySpec::new(vec![1, 2]), PartySpec::new(vec![2])]).unwrap(),
    ]
}

fn pick_scenario(rng: &mut ChaCha8Rng) -> Scenario {
    let all = scenarios();
    all[rng.gen_range(0..all.len())].clone()
}

pub fn mixture(checker: &Checker, rng: &mut ChaCha8Rng) -> bool {
    let s = pick_scenario(rng);
    let v = checker.vertices(&s);
    let m = rng.gen_range(1..=4);
    let parts: Vec<Correlation> = (0..m)
        .map(|_| {
            if rng.gen_bool(0.5) {
                v.get(rng.gen_range(0..v.len())).to_correlation()
            } else {
                random_causal(rng, &s, DEN).unwrap()
            }
        })
        .collect();
    let w = random_weights(rng, m, DEN);
    checker.causal(&Correlation::mix(&parts, &w).unwrap())
}

pub fn marginal(checker: &Checker, rng: &mut ChaCha8Rng) -> bool {
    let s = Scenario::lazy(3);
    let c = random_causal(rng, &s, DEN).unwrap();
    let mask = rng.gen_range(1..7usize);
    let keep: Vec<usize> = (0..3).filter(|k| mask >> k & 1 == 1).collect();
    let removed: Vec<usize> = (0..3).filter(|k| mask >> k & 1 == 0).map(|k| rng.gen_range(0..s.inputs(k))).collect();
    checker.causal(&c.marginalize(&keep, &removed).unwrap())
}

pub fn sequential(checker: &Checker, rng: &mut ChaCha8Rng) -> bool {
    let s = pick_scenario(rng);
    let n = s.num_parties();
    let mask = rng.gen_range(1..(1usize << n) - 1);
    let first_parties: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
    let rest: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 0).collect();
    let first = random_causal(rng, &s.restrict(&first_parties).unwrap(), DEN).unwrap();
    let s_rest = s.restrict(&rest).unwrap();
    let c = Correlation::sequential_compose(&s, &first_parties, &first, |_, _| random_causal(rng, &s_rest, DEN).ok())
        .unwrap();
    checker.causal(&c)
}

pub fn subset_form(checker: &Checker, rng: &mut ChaCha8Rng) -> bool {
    let s = pick_scenario(rng);
    checker.causal(&random_subset_form(rng, &s, DEN).unwrap())
}

pub fn party_last(checker: &Checker, rng: &mut ChaCha8Rng) -> bool {
    let s = pick_scenario(rng);
    checker.causal(&random_party_last(rng, &s, DEN).unwrap())
}

/// A and B output biased random bits, C outputs 1 iff each guessed the
/// other's input. The tripartite table is causal; post-selecting `c = 1`
/// must give a noncausal bipartite table. Returns true when both hold.
pub fn postselection(checker: &Checker, rng: &mut ChaCha8Rng) -> bool {
    let binary = PartySpec::new(vec![2, 2]);
    let s = Scenario::new(vec![binary.clone(), binary, PartySpec::new(vec![2])]).unwrap();
    // Strictly positive output biases per party and input.
    let mut bias = || -> Vec<Rational> {
        (0..2)
            .map(|_| Rational::new(BigInt::from(rng.gen_range(1..=5)), BigInt::from(6)))
            .collect()
    };
    let (pa, pb) = (bias(), bias());
    let one = Rational::from_integer(1.into());
    let c = Correlation::from_fn(s, |x, a| {
        let qa = if a[0] == 1 { pa[x[0]].clone() } else { &one - &pa[x[0]] };
        let qb = if a[1] == 1 { pb[x[1]].clone() } else { &one - &pb[x[1]] };
        let win = usize::from(a[0] == x[1] && a[1] == x[0]);
        if a[2] == win {
            qa * qb
        } else {
            Rational::from_integer(0.into())
        }
    })
    .unwrap();
    let post = c.postselect_output(2, 0, 1, PostSelection::MayBreakCausality).unwrap();
    checker.causal(&c) && !checker.causal(&post)
}

/// Random causal tripartite table whose last party has one input; the
/// table without that party is still causal.
pub fn drop_fixed_input(checker: &Checker, rng: &mut ChaCha8Rng) -> bool {
    let s = Scenario::new(vec![PartySpec::new(vec![1, 2]), PartySpec::new(vec![1, 2]), PartySpec::new(vec![2])]).unwrap();
    let c = random_causal(rng, &s, DEN).unwrap();
    checker.causal(&c) && checker.causal(&c.drop_fixed_input_party(2).unwrap())
}

pub type Check = fn(&Checker, &mut ChaCha8Rng) -> bool;

pub const PROPERTIES: &[(&str, Check)] = &[
    ("convex mixtures", mixture),
    ("marginals", marginal),
    ("sequential compositions", sequential),
    ("subset-form constructions", subset_form),
    ("party-last constructions", party_last),
    ("post-selected counterexample", postselection),
];
