//! Minimizing the inner-solved energy over Teichmüller space.
//!
//! Tangent directions are cocycles on the generators. The derivative of
//! the energy along `σ` is the pairing of `σ` with the dual surface, so the
//! descent direction is `-Σ g_b b` over an orthonormal basis of the cocycles
//! orthogonal to the coboundaries. The loop stops when the translation
//! cocycle of the dual surface is a coboundary.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::dual_cocycle::{equivariant_dual, integrate_dual, pairing_derivative, EquivariantDual};
use crate::energy::EnergyVariant;
use crate::error::{Error, Result};
use crate::fuchsian::{
    coboundary_matrix, project_to_cocycles, relator_jacobian, renormalize_relator, GeneratorCocycle,
    HolonomyRep,
};
use crate::harmonic::{solve_harmonic, EdgeWeights, HarmonicSolution, SolverOptions};
use crate::minkowski::{exp_so21, MinkVec};
use crate::surface::MarkedSurface;

/// `R_k ← exp(t s_k) R_k`, then the relator is restored.
pub fn deform_rep(rep: &HolonomyRep, sigma: &GeneratorCocycle, t: f64, tol_rel: f64) -> Result<HolonomyRep> {
    let gens = rep
        .generators()
        .iter()
        .zip(&sigma.values)
        .map(|(g, s)| exp_so21(s, t) * *g)
        .collect();
    let moved = HolonomyRep::from_parts_unchecked(gens, rep.relator().clone());
    if moved.relator_residual() <= 0.1 * tol_rel {
        return Ok(moved);
    }
    renormalize_relator(&moved, tol_rel)
}

/// Orthonormal basis of the cocycles orthogonal to the coboundaries, in the
/// coordinate inner product on stacked generator values.
pub fn basis_h1(rep: &HolonomyRep) -> Result<Vec<GeneratorCocycle>> {
    let n = 3 * rep.n_generators();
    let expected = n - 6;
    let l = relator_jacobian(rep);
    let llt = &l * l.transpose();
    let inv = llt
        .try_inverse()
        .ok_or_else(|| Error::Rank("relator jacobian is singular".into()))?;
    let pz = DMatrix::identity(n, n) - l.transpose() * inv * &l;
    let b = coboundary_matrix(rep);
    let qb = b.qr().q();
    let ph = pz - &qb * qb.transpose();
    let sym = (&ph + ph.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let kept = eig.eigenvalues[order[expected - 1]];
    let dropped = eig.eigenvalues[order[expected]].abs();
    if kept < 0.5 || kept / dropped.max(f64::MIN_POSITIVE) < 1e6 {
        return Err(Error::Rank(format!(
            "H1 spectrum has no gap at dimension {expected} ({kept:e} vs {dropped:e})"
        )));
    }
    Ok(order[..expected]
        .iter()
        .map(|&k| {
            let mut v = eig.eigenvectors.column(k).into_owned();
            // fix the sign so the basis is reproducible
            let imax = v.iamax();
            if v[imax] < 0.0 {
                v = -v;
            }
            GeneratorCocycle::from_vector(&v)
        })
        .collect())
}

/// Seeded combination of the [`basis_h1`] vectors with coefficients
/// uniform in `[-1, 1)`.
pub fn random_h1_direction(rep: &HolonomyRep, seed: u64) -> Result<GeneratorCocycle> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    Ok(basis_h1(rep)?.iter().fold(GeneratorCocycle::zero(rep.n_generators()), |acc, b| {
        acc.add(&b.scaled(rng.random_range(-1.0..1.0)))
    }))
}

#[derive(Clone, Debug)]
pub struct OuterOptions {
    /// Bound on the distance of `τ` from the coboundaries.
    pub tol_outer: f64,
    /// Bound on every pairing coefficient.
    pub tol_coefficients: f64,
    pub max_outer: usize,
    pub max_backtracks: usize,
    pub armijo: f64,
    pub tol_rel: f64,
    pub inner: SolverOptions,
}

impl Default for OuterOptions {
    fn default() -> Self {
        OuterOptions {
            tol_outer: 1e-6,
            tol_coefficients: 1e-5,
            max_outer: 500,
            max_backtracks: 30,
            armijo: 1e-4,
            tol_rel: 1e-9,
            inner: SolverOptions::default(),
        }
    }
}

/// One accepted outer iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct OuterLogEntry {
    pub iteration: usize,
    pub energy: f64,
    pub tau_residual: f64,
    pub gradient_norm: f64,
    pub step: f64,
    pub inner_sweeps: usize,
}

#[derive(Clone, Debug)]
pub struct TeichState {
    pub surface: MarkedSurface,
    pub inner: HarmonicSolution,
    pub dual: EquivariantDual,
    /// Pairing coefficients against `basis`.
    pub coefficients: Vec<f64>,
    pub basis: Vec<GeneratorCocycle>,
    /// Pairing coefficients against the three coboundary directions.
    pub gauge_coefficients: [f64; 3],
    pub iterations: usize,
    pub log: Vec<OuterLogEntry>,
}

impl TeichState {
    pub fn energy(&self) -> f64 {
        self.inner.energy
    }

    pub fn tau_residual(&self) -> f64 {
        self.dual.residual
    }

    pub fn max_coefficient(&self) -> f64 {
        self.coefficients.iter().fold(0.0, |m, g| m.max(g.abs()))
    }

    /// Both halves of the optimality certificate.
    pub fn is_certified(&self, opts: &OuterOptions) -> bool {
        self.tau_residual() <= opts.tol_outer && self.max_coefficient() <= opts.tol_coefficients
    }
}

/// Inner solve, dual surface and pairing coefficients at a fixed structure.
pub fn evaluate_state(
    ms: MarkedSurface,
    c: &EdgeWeights,
    variant: &EnergyVariant,
    start: &[MinkVec],
    inner: &SolverOptions,
) -> Result<TeichState> {
    let sol = solve_harmonic(&ms, c, variant, start, inner)?;
    let dual = integrate_dual(&ms, &sol.positions, c, variant, MinkVec::zeros(), inner.min_length)?;
    let eq = equivariant_dual(&ms, &dual, inner.tol)?;
    let basis = basis_h1(&ms.rep)?;
    let coefficients = basis.iter().map(|b| pairing_derivative(&ms, &eq.dual, b)).collect();
    // orthonormal coboundary directions, on the same footing as the basis
    let q = coboundary_matrix(&ms.rep).qr().q();
    let gauge_coefficients = [0, 1, 2].map(|k| {
        let dir = GeneratorCocycle::from_vector(&q.column(k).into_owned());
        pairing_derivative(&ms, &eq.dual, &dir)
    });
    Ok(TeichState {
        surface: ms,
        inner: sol,
        dual: eq,
        coefficients,
        basis,
        gauge_coefficients,
        iterations: 0,
        log: Vec::new(),
    })
}

fn combine(basis: &[GeneratorCocycle], coords: &[f64]) -> GeneratorCocycle {
    let n = basis[0].values.len();
    basis
        .iter()
        .zip(coords)
        .fold(GeneratorCocycle::zero(n), |acc, (b, x)| acc.add(&b.scaled(*x)))
}

/// Central differences of the pairing coefficients along each basis
/// direction.
pub fn coefficient_hessian(
    state: &TeichState,
    c: &EdgeWeights,
    variant: &EnergyVariant,
    inner: &SolverOptions,
    tol_rel: f64,
    h: f64,
) -> Result<DMatrix<f64>> {
    let k = state.basis.len();
    let mut hess = DMatrix::zeros(k, k);
    for (a, b) in state.basis.iter().enumerate() {
        let side = |t: f64| -> Result<Vec<f64>> {
            let rep = deform_rep(&state.surface.rep, b, t, tol_rel)?;
            let ms = state.surface.with_rep(rep)?;
            let sol = solve_harmonic(&ms, c, variant, &state.inner.positions, inner)?;
            let dual = integrate_dual(&ms, &sol.positions, c, variant, MinkVec::zeros(), inner.min_length)?;
            // the old basis is only a cocycle up to O(t) at the new point
            state
                .basis
                .iter()
                .map(|x| Ok(pairing_derivative(&ms, &dual, &project_to_cocycles(&ms.rep, x)?)))
                .collect()
        };
        let p = side(h)?;
        let m = side(-h)?;
        for j in 0..k {
            hess[(j, a)] = (p[j] - m[j]) / (2.0 * h);
        }
    }
    Ok((&hess + hess.transpose()) * 0.5)
}

/// Newton step in basis coordinates; eigenvalues are replaced by their
/// absolute values so the step always descends.
fn newton_direction(
    state: &TeichState,
    c: &EdgeWeights,
    variant: &EnergyVariant,
    inner: &SolverOptions,
    tol_rel: f64,
) -> Result<DVector<f64>> {
    let hess = coefficient_hessian(state, c, variant, inner, tol_rel, 1e-4)?;
    let eig = SymmetricEigen::new(hess);
    let top = eig.eigenvalues.amax();
    let g = DVector::from_column_slice(&state.coefficients);
    let vt_g = eig.eigenvectors.transpose() * &g;
    let scaled = DVector::from_iterator(
        vt_g.len(),
        vt_g.iter().zip(eig.eigenvalues.iter()).map(|(x, l)| -x / l.abs().max(1e-8 * top)),
    );
    Ok(&eig.eigenvectors * scaled)
}

/// Damped Newton iteration on the pairing coefficients, with a
/// finite-difference Hessian and Armijo backtracking on the inner-solved
/// energy; inner solves are warm-started.
pub fn optimize_metric(
    ms: MarkedSurface,
    c: &EdgeWeights,
    variant: &EnergyVariant,
    start: &[MinkVec],
    opts: &OuterOptions,
) -> Result<TeichState> {
    optimize_metric_with(ms, c, variant, start, opts, |_| {})
}

/// [`optimize_metric`] reporting every accepted iterate.
pub fn optimize_metric_with(
    ms: MarkedSurface,
    c: &EdgeWeights,
    variant: &EnergyVariant,
    start: &[MinkVec],
    opts: &OuterOptions,
    mut progress: impl FnMut(&OuterLogEntry),
) -> Result<TeichState> {
    let mut state = evaluate_state(ms, c, variant, start, &opts.inner)?;
    let mut log = vec![OuterLogEntry {
        iteration: 0,
        energy: state.energy(),
        tau_residual: state.tau_residual(),
        gradient_norm: norm(&state.coefficients),
        step: 0.0,
        inner_sweeps: state.inner.sweeps,
    }];
    progress(&log[0]);
    let mut iter = 0;
    while !state.is_certified(opts) {
        if iter >= opts.max_outer {
            return Err(Error::Convergence {
                iterations: iter,
                residual: state.tau_residual(),
            });
        }
        iter += 1;
        let inner = opts.inner.clone();
        let g = DVector::from_column_slice(&state.coefficients);
        let coords = newton_direction(&state, c, variant, &inner, opts.tol_rel)
            .unwrap_or_else(|_| -&g);
        let slope = g.dot(&coords);
        let (coords, slope) = if slope < 0.0 { (coords, slope) } else { (-&g, -g.dot(&g)) };
        let dir = combine(&state.basis, coords.as_slice());
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let trial = deform_rep(&state.surface.rep, &dir, t, opts.tol_rel)
                .and_then(|rep| state.surface.with_rep(rep))
                .and_then(|ms| evaluate_state(ms, c, variant, &state.inner.positions, &inner));
            if let Ok(next) = trial {
                let decrease = state.energy() - next.energy();
                // evaluated labels carry the relator residual, which puts
                // the energy's noise floor near 1e-8 relative
                let noise = ENERGY_NOISE * state.energy().abs().max(1.0);
                let armijo = decrease >= -opts.armijo * t * slope;
                // below that floor, settle for a smaller gradient without
                // a visible energy increase
                let flat = decrease > -noise
                    && -opts.armijo * t * slope < noise
                    && norm(&next.coefficients) < norm(&state.coefficients);
                if armijo || flat {
                    accepted = Some(next);
                    break;
                }
            }
            t *= 0.5;
        }
        let Some(next) = accepted else {
            return Err(Error::Convergence {
                iterations: iter,
                residual: state.tau_residual(),
            });
        };
        state = next;
        log.push(OuterLogEntry {
            iteration: iter,
            energy: state.energy(),
            tau_residual: state.tau_residual(),
            gradient_norm: norm(&state.coefficients),
            step: t,
            inner_sweeps: state.inner.sweeps,
        });
        progress(log.last().unwrap());
    }
    state.iterations = iter;
    state.log = log;
    Ok(state)
}

const ENERGY_NOISE: f64 = 1e-8;

#[cfg(test)]
fn dot(a: &GeneratorCocycle, b: &GeneratorCocycle) -> f64 {
    a.to_vector().dot(&b.to_vector())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
