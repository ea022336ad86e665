//! Relabeling symmetries of a scenario and canonical forms of inequalities.
//!
//! The group is generated by permutations of parties with identical
//! alphabets and by permutations of the outputs of every (party, input).
//! Elements act on the full table; an inequality's canonical form is the
//! lexicographically smallest primitive coefficient vector (constant last)
//! over its orbit.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::Inequality;
use crate::number::Rational;
use crate::scenario::Scenario;

#[derive(Clone, Debug)]
pub struct SymmetryGroup {
    scenario: Scenario,
    /// For each element, the image of every table entry.
    entry_maps: Vec<Vec<usize>>,
    /// Indices of the pure party permutations (identity relabelings).
    party_perms: Vec<usize>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

impl SymmetryGroup {
    pub fn new(scenario: &Scenario) -> Self {
        let s = scenario;
        let n = s.num_parties();
        let party_perms: Vec<Vec<usize>> = permutations(n)
            .into_iter()
            .filter(|p| (0..n).all(|k| s.parties()[p[k]] == s.parties()[k]))
            .collect();
        // One slot per (party, input): the list of output permutations.
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|k| (0..s.inputs(k)).map(move |x| (k, x))).collect();
        let slot_perms: Vec<Vec<Vec<usize>>> = slots.iter().map(|&(k, x)| permutations(s.outputs(k, x))).collect();
        let mut relabelings: Vec<Vec<usize>> = vec![vec![]];
        for perms in &slot_perms {
            relabelings = relabelings
                .into_iter()
                .flat_map(|r| {
                    (0..perms.len()).map(move |i| {
                        let mut r = r.clone();
                        r.push(i);
                        r
                    })
                })
                .collect();
        }
        let slot_index = |k: usize, x: usize| slots.iter().position(|&sl| sl == (k, x)).expect("slot");
        let mut entry_maps = Vec::with_capacity(party_perms.len() * relabelings.len());
        let mut pure = Vec::new();
        for pi in &party_perms {
            for rel in &relabelings {
                if rel.iter().all(|&i| i == 0) {
                    pure.push(entry_maps.len());
                }
                let mut map = vec![0usize; s.num_entries()];
                for xi in 0..s.num_inputs() {
                    let x = s.input_tuple(xi);
                    for ai in 0..s.block_size(xi) {
                        let a = s.output_tuple(&x, ai);
                        let mut x2 = vec![0; n];
                        let mut a2 = vec![0; n];
                        for k in 0..n {
                            let sl = slot_index(k, x[k]);
                            x2[pi[k]] = x[k];
                            a2[pi[k]] = slot_perms[sl][rel[sl]][a[k]];
                        }
                        map[s.block_offset(xi) + ai] = s.entry_index(&x2, &a2);
                    }
                }
                entry_maps.push(map);
            }
        }
        Self { scenario: s.clone(), entry_maps, party_perms: pure }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn order(&self) -> usize {
        self.entry_maps.len()
    }

    /// Image of `ineq` under group element `g`.
    pub fn apply(&self, g: usize, ineq: &Inequality) -> Inequality {
        let table = ineq.to_table();
        let map = &self.entry_maps[g];
        let mut image = vec![0i64; table.len()];
        for (e, &t) in table.iter().enumerate() {
            image[map[e]] = t;
        }
        let s = &self.scenario;
        let mut coeffs = Vec::with_capacity(s.dimension());
        let mut constant = ineq.constant;
        for xi in 0..s.num_inputs() {
            let block = &image[s.block_offset(xi)..s.block_offset(xi) + s.block_size(xi)];
            constant += block[0];
            coeffs.extend(block[1..].iter().map(|t| t - block[0]));
        }
        let mut out = Inequality::new(s.clone(), coeffs, constant).expect("dimension preserved");
        out.label = ineq.label.clone();
        out
    }

    /// The orbit of `ineq` (distinct images, labels dropped).
    pub fn orbit(&self, ineq: &Inequality) -> BTreeSet<(Vec<i64>, i64)> {
        (0..self.order())
            .map(|g| {
                let im = self.apply(g, ineq);
                (im.coeffs, im.constant)
            })
            .collect()
    }

    /// Whether some member of the orbit is fixed by every party permutation.
    pub fn is_party_symmetric(&self, ineq: &Inequality) -> bool {
        self.orbit(ineq).into_iter().any(|(c, c0)| {
            let member = Inequality { scenario: self.scenario.clone(), coeffs: c, constant: c0, label: None };
            self.party_perms
                .iter()
                .all(|&g| self.apply(g, &member).coeffs == member.coeffs)
        })
    }
}

/// Canonical representative of `ineq`'s orbit and the orbit size.
pub fn canonicalize(ineq: &Inequality, group: &SymmetryGroup) -> (Inequality, usize) {
    let orbit = group.orbit(ineq);
    let size = orbit.len();
    let (coeffs, constant) = orbit.into_iter().next().expect("orbit contains the inequality");
    let mut rep = Inequality::new(ineq.scenario.clone(), coeffs, constant).expect("same scenario");
    rep.label = ineq.label.clone();
    (rep, size)
}

/// Whether the inequality is `P(a|x) ≥ 0` for a single table entry.
pub fn is_positivity(ineq: &Inequality) -> bool {
    let s = &ineq.scenario;
    let nz: Vec<usize> = (0..ineq.coeffs.len()).filter(|&i| ineq.coeffs[i] != 0).collect();
    if ineq.constant == 0 {
        return nz.len() == 1 && ineq.coeffs[nz[0]] == 1;
    }
    if ineq.constant != 1 || nz.is_empty() {
        return false;
    }
    // 1 - Σ_{a≠0} P(a|x) ≥ 0, i.e. P(0|x) ≥ 0.
    let xi = (0..s.num_inputs()).find(|&xi| s.coord_offset(xi) <= nz[0] && nz[0] < s.coord_offset(xi) + s.block_size(xi) - 1);
    match xi {
        Some(xi) => {
            let off = s.coord_offset(xi);
            let len = s.block_size(xi) - 1;
            nz.len() == len && nz.iter().all(|&i| i >= off && i < off + len && ineq.coeffs[i] == -1)
        }
        None => false,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetClass {
    pub representative: Inequality,
    pub orbit_size: usize,
    /// Number of members found in the classified list.
    pub members: usize,
    pub positivity: bool,
    pub party_symmetric: bool,
}

/// Groups a facet list into symmetry classes, ordered by representative.
pub fn classify_facets(facets: &[Inequality], group: &SymmetryGroup) -> Vec<FacetClass> {
    use rayon::prelude::*;
    let canon: Vec<(Inequality, usize)> = facets.par_iter().map(|f| canonicalize(f, group)).collect();
    let mut classes: BTreeMap<(Vec<i64>, i64), FacetClass> = BTreeMap::new();
    for (mut rep, size) in canon {
        rep.label = None;
        classes
            .entry((rep.coeffs.clone(), rep.constant))
            .and_modify(|c| c.members += 1)
            .or_insert_with(|| FacetClass {
                positivity: is_positivity(&rep),
                party_symmetric: group.is_party_symmetric(&rep),
                representative: rep,
                orbit_size: size,
                members: 1,
            });
    }
    classes.into_values().collect()
}

/// Table-form value helper used in tests and by the catalog.
pub fn table_value(ineq: &Inequality, table: &[Rational]) -> Rational {
    let t = ineq.to_table();
    let mut acc = Rational::from_integer(ineq.constant.into());
    for (c, p) in t.iter().zip(table) {
        if *c != 0 {
            acc += p * Rational::from_integer((*c).into());
        }
    }
    acc
}
