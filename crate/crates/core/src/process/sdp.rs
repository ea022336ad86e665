//! Linear minimization over `{X ⪰ 0} ∩ affine set` for block-diagonal
//! Hermitian variables, by ADMM on the splitting `X ∈ affine`, `Z ⪰ 0`.
//!
//! The returned point is always exactly feasible up to rounding: the last
//! PSD iterate is projected onto the affine set and, if that made it
//! indefinite, mixed with a strictly positive interior point.

use super::operator::Operator;

#[derive(Clone, Debug)]
pub struct AdmmOptions {
    pub max_iterations: usize,
    /// Stop once primal and dual residuals (Frobenius, relative to the
    /// variable norm) both drop below this.
    pub tolerance: f64,
    pub initial_rho: f64,
    /// Residual-balancing period.
    pub adapt_every: usize,
}

impl Default for AdmmOptions {
    fn default() -> Self {
        Self { max_iterations: 20_000, tolerance: 1e-9, initial_rho: 1.0, adapt_every: 10 }
    }
}

/// Iterates kept between calls so that nearby problems start warm.
#[derive(Clone, Debug)]
pub struct AdmmState {
    pub z: Vec<Operator>,
    pub u: Vec<Operator>,
    pub rho: f64,
}

impl AdmmState {
    pub fn new(start: Vec<Operator>, rho: f64) -> Self {
        let u = start.iter().map(|b| Operator::zeros(b.dim())).collect();
        Self { z: start, u, rho }
    }
}

pub struct BlockProblem<'a> {
    /// Objective `Σ_b Re tr(C_b X_b)`; every `C_b` Hermitian.
    pub cost: &'a [Operator],
    /// Orthogonal projection onto the affine set, in place.
    pub project: &'a dyn Fn(&mut [Operator]),
    /// A feasible point with every block positive definite.
    pub interior: &'a [Operator],
}

#[derive(Clone, Debug)]
pub struct AdmmOutcome {
    pub x: Vec<Operator>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

fn norm(blocks: &[Operator]) -> f64 {
    blocks.iter().map(|b| b.frobenius_norm().powi(2)).sum::<f64>().sqrt()
}

pub fn objective(cost: &[Operator], x: &[Operator]) -> f64 {
    cost.iter().zip(x).map(|(c, x)| c.inner(x)).sum()
}

/// Projects `z` onto the affine set and restores positivity by mixing with
/// the interior point.
pub fn repair(problem: &BlockProblem<'_>, z: &[Operator]) -> Vec<Operator> {
    let mut x: Vec<Operator> = z.iter().map(Operator::hermitian_part).collect();
    (problem.project)(&mut x);
    x.iter_mut().for_each(|b| *b = b.hermitian_part());
    let mut t: f64 = 0.0;
    for (b, i) in x.iter().zip(problem.interior) {
        let lam = b.min_eigenvalue();
        if lam < 0.0 {
            let mu = i.min_eigenvalue();
            t = t.max(-lam / (mu - lam));
        }
    }
    if t > 0.0 {
        // A hair above the exact mixing weight absorbs eigensolver rounding.
        let t = (t * (1.0 + 1e-9) + 1e-15).min(1.0);
        for (b, i) in x.iter_mut().zip(problem.interior) {
            b.scale(1.0 - t);
            b.axpy(t, i);
        }
    }
    x
}

pub fn solve(problem: &BlockProblem<'_>, state: &mut AdmmState, opts: &AdmmOptions) -> AdmmOutcome {
    let nb = problem.cost.len();
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut x: Vec<Operator> = Vec::with_capacity(nb);
    while iterations < opts.max_iterations {
        iterations += 1;
        let rho = state.rho;
        x.clear();
        for b in 0..nb {
            let mut v = &state.z[b] - &state.u[b];
            v.axpy(-1.0 / rho, &problem.cost[b]);
            x.push(v);
        }
        (problem.project)(&mut x);
        let mut z_new = Vec::with_capacity(nb);
        for b in 0..nb {
            z_new.push((&x[b] + &state.u[b]).psd_projection());
        }
        let mut r2 = 0.0;
        let mut s2 = 0.0;
        for b in 0..nb {
            let diff = &x[b] - &z_new[b];
            r2 += diff.frobenius_norm().powi(2);
            s2 += (&z_new[b] - &state.z[b]).frobenius_norm().powi(2);
            state.u[b] += &diff;
        }
        state.z = z_new;
        let scale = norm(&state.z).max(1.0);
        primal = r2.sqrt() / scale;
        dual = rho * s2.sqrt() / (rho * norm(&state.u)).max(1.0);
        if primal < opts.tolerance && dual < opts.tolerance {
            converged = true;
            break;
        }
        if opts.adapt_every > 0 && iterations % opts.adapt_every == 0 {
            let factor = if primal > 10.0 * dual {
                2.0
            } else if dual > 10.0 * primal {
                0.5
            } else {
                1.0
            };
            if factor != 1.0 {
                state.rho *= factor;
                state.u.iter_mut().for_each(|u| u.scale(1.0 / factor));
            }
        }
    }
    let x = repair(problem, &state.z);
    let value = objective(problem.cost, &x);
    AdmmOutcome { x, value, iterations, converged, primal_residual: primal, dual_residual: dual }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::operator::{pauli_product, C64};

    #[test]
    fn minimum_eigenvalue_as_sdp() {
        // min tr(C X) over density matrices is the least eigenvalue of C.
        let c = &pauli_product("X").unwrap().kron(&pauli_product("Z").unwrap()) + &pauli_product("1Y").unwrap();
        let cost = vec![c.clone()];
        let project = |x: &mut [Operator]| {
            let n = x[0].dim() as f64;
            let shift = (1.0 - x[0].trace().re) / n;
            for i in 0..x[0].dim() {
                let v = x[0].get(i, i) + C64::new(shift, 0.0);
                x[0].set(i, i, v);
            }
        };
        let interior = vec![&Operator::identity(4) * 0.25];
        let problem = BlockProblem { cost: &cost, project: &project, interior: &interior };
        let mut state = AdmmState::new(interior.clone(), 1.0);
        let out = solve(&problem, &mut state, &AdmmOptions::default());
        assert!(out.converged);
        assert!((out.value - c.min_eigenvalue()).abs() < 1e-6, "{} vs {}", out.value, c.min_eigenvalue());
        assert!(out.x[0].min_eigenvalue() >= -1e-12);
        assert!((out.x[0].trace().re - 1.0).abs() < 1e-12);
    }
}
