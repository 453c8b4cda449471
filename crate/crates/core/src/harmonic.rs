//! Equivariant discrete harmonic maps at a fixed holonomy.
//!
//! One position per vertex is stored; the half-edge `h = (i → j)` runs from
//! `f_i` to `ρ(g_h) f_j`. Every quotient edge is counted once in the energy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::EnergyVariant;
use crate::error::{Error, Result};
use crate::minkowski::{
    acosh_stable, cross, exp_map, inner, norm, project_hyperboloid, MinkVec, E0,
};
use crate::surface::MarkedSurface;

/// Positive weights indexed by edge.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeWeights(Vec<f64>);

impl EdgeWeights {
    pub fn new(c: Vec<f64>) -> Result<Self> {
        if let Some(e) = c.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::Domain(format!("edge weight {} at edge {e} is not positive", c[e])));
        }
        Ok(EdgeWeights(c))
    }

    pub fn uniform(n_edges: usize, c: f64) -> Self {
        EdgeWeights(vec![c; n_edges])
    }

    pub fn get(&self, e: usize) -> f64 {
        self.0[e]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn scaled(&self, s: f64) -> Self {
        EdgeWeights(self.0.iter().map(|c| c * s).collect())
    }
}

/// `ρ(g_h) f_j` for `h = (i → j)`.
#[inline]
pub fn far_end(ms: &MarkedSurface, f: &[MinkVec], h: usize) -> MinkVec {
    let j = ms.complex.target(h);
    ms.label_matrix(h).apply(&f[j])
}

#[inline]
fn raw_length(ms: &MarkedSurface, f: &[MinkVec], h: usize) -> f64 {
    let i = ms.complex.origin(h);
    acosh_stable(-inner(&f[i], &far_end(ms, f, h)))
}

/// `arccosh(-<f_i, ρ(g_h) f_j>)`.
pub fn edge_length(ms: &MarkedSurface, f: &[MinkVec], h: usize, min_length: f64) -> Result<f64> {
    let l = raw_length(ms, f, h);
    if l < min_length {
        return Err(Error::DegenerateEdge {
            edge: ms.complex.edge(h),
            length: l,
        });
    }
    Ok(l)
}

/// Lengths of all edges, measured on their canonical half-edges.
pub fn edge_lengths(ms: &MarkedSurface, f: &[MinkVec], min_length: f64) -> Result<Vec<f64>> {
    (0..ms.complex.n_edges())
        .map(|e| edge_length(ms, f, ms.complex.edge_half(e), min_length))
        .collect()
}

pub fn dirichlet_energy(
    ms: &MarkedSurface,
    f: &[MinkVec],
    c: &EdgeWeights,
    variant: &EnergyVariant,
    min_length: f64,
) -> Result<f64> {
    let ls = edge_lengths(ms, f, min_length)?;
    Ok(ls
        .iter()
        .enumerate()
        .map(|(e, &l)| variant.value(c.get(e), l))
        .sum())
}

/// `k_h = w'(ℓ_h) / sinh ℓ_h`.
#[inline]
pub fn edge_coefficient(
    ms: &MarkedSurface,
    f: &[MinkVec],
    c: &EdgeWeights,
    variant: &EnergyVariant,
    h: usize,
) -> f64 {
    variant.cross_coefficient(c.get(ms.complex.edge(h)), raw_length(ms, f, h))
}

/// `r_i = Σ_h k_h f_i × ρ(g_h) f_j` over half-edges leaving `i`.
pub fn residual_vector(
    ms: &MarkedSurface,
    f: &[MinkVec],
    c: &EdgeWeights,
    variant: &EnergyVariant,
    i: usize,
) -> MinkVec {
    ms.complex
        .outgoing(i)
        .into_iter()
        .map(|h| edge_coefficient(ms, f, c, variant, h) * cross(&f[i], &far_end(ms, f, h)))
        .sum()
}

/// Largest Minkowski norm of the vertex residuals; zero exactly at
/// harmonic maps.
pub fn harmonic_residual(
    ms: &MarkedSurface,
    f: &[MinkVec],
    c: &EdgeWeights,
    variant: &EnergyVariant,
) -> f64 {
    (0..ms.complex.n_vertices())
        .map(|i| norm(&residual_vector(ms, f, c, variant, i)))
        .fold(0.0, f64::max)
}

/// `v_i = Σ_h k_h (ρ(g_h) f_j - f_i)`.
pub fn weighted_displacement(
    ms: &MarkedSurface,
    f: &[MinkVec],
    c: &EdgeWeights,
    variant: &EnergyVariant,
    i: usize,
) -> MinkVec {
    ms.complex
        .outgoing(i)
        .into_iter()
        .map(|h| edge_coefficient(ms, f, c, variant, h) * (far_end(ms, f, h) - f[i]))
        .sum()
}

/// `μ_i = -<v_i, f_i>`, the normal component of the weighted displacement.
pub fn lagrange_multiplier(
    ms: &MarkedSurface,
    f: &[MinkVec],
    c: &EdgeWeights,
    variant: &EnergyVariant,
    i: usize,
) -> f64 {
    -inner(&weighted_displacement(ms, f, c, variant, i), &f[i])
}

/// `v_i - μ_i f_i`, the tangential part of the weighted displacement.
pub fn tangential_defect(
    ms: &MarkedSurface,
    f: &[MinkVec],
    c: &EdgeWeights,
    variant: &EnergyVariant,
    i: usize,
) -> MinkVec {
    let v = weighted_displacement(ms, f, c, variant, i);
    v + inner(&v, &f[i]) * f[i]
}

/// Energy of the edges at `i` as a function of the position `x` of `i`,
/// counting loops once.
fn star_energy(
    ms: &MarkedSurface,
    f: &[MinkVec],
    c: &EdgeWeights,
    variant: &EnergyVariant,
    i: usize,
    x: &MinkVec,
    min_length: f64,
) -> Option<f64> {
    let cx = &ms.complex;
    let mut total = 0.0;
    for h in cx.outgoing(i) {
        let j = cx.target(h);
        let other = if j == i { *x } else { f[j] };
        if j == i && !cx.is_canonical(h) {
            continue;
        }
        let l = acosh_stable(-inner(x, &ms.label_matrix(h).apply(&other)));
        if l < min_length {
            return None;
        }
        total += variant.value(c.get(cx.edge(h)), l);
    }
    Some(total)
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_sweeps: usize,
    pub min_length: f64,
    /// Line-search halvings per vertex update.
    pub max_backtracks: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_sweeps: 10_000,
            min_length: 1e-8,
            max_backtracks: 40,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HarmonicSolution {
    pub positions: Vec<MinkVec>,
    pub sweeps: usize,
    pub accepted_steps: usize,
    pub residual: f64,
    pub energy: f64,
    /// Energy after each sweep, starting with the initial energy.
    pub energy_history: Vec<f64>,
}

fn relax_vertex(
    ms: &MarkedSurface,
    f: &mut [MinkVec],
    c: &EdgeWeights,
    variant: &EnergyVariant,
    i: usize,
    opts: &SolverOptions,
) -> bool {
    let d = tangential_defect(ms, f, c, variant, i);
    let dn2 = inner(&d, &d).max(0.0);
    if dn2 == 0.0 {
        return false;
    }
    let scale: f64 = ms
        .complex
        .outgoing(i)
        .into_iter()
        .map(|h| {
            let k = edge_coefficient(ms, f, c, variant, h);
            k * (-inner(&f[i], &far_end(ms, f, h)))
        })
        .sum();
    let Some(e0) = star_energy(ms, f, c, variant, i, &f[i], opts.min_length) else {
        return false;
    };
    let r0 = norm(&cross(&f[i], &d));
    let mut alpha = 1.0 / scale.max(1e-300);
    for _ in 0..opts.max_backtracks {
        let step = alpha * dn2.sqrt();
        if step <= 0.5 {
            let x = project_hyperboloid(&exp_map(&f[i], &(alpha * d)))
                .map(|p| p.into_vec())
                .unwrap_or(f[i]);
            if let Some(e1) = star_energy(ms, f, c, variant, i, &x, opts.min_length) {
                let armijo = e1 <= e0 - 1e-4 * alpha * dn2;
                let rounding = e1 <= e0 + 1e-12 * e0.abs() && {
                    let old = f[i];
                    f[i] = x;
                    let r1 = norm(&residual_vector(ms, f, c, variant, i));
                    f[i] = old;
                    r1 < r0
                };
                if armijo || rounding {
                    f[i] = x;
                    return true;
                }
            }
        }
        alpha *= 0.5;
    }
    false
}

/// Relaxes every vertex once in index order; returns the number of
/// accepted moves.
pub fn gauss_seidel_sweep(
    ms: &MarkedSurface,
    f: &mut [MinkVec],
    c: &EdgeWeights,
    variant: &EnergyVariant,
    opts: &SolverOptions,
) -> usize {
    (0..ms.complex.n_vertices())
        .filter(|&i| relax_vertex(ms, f, c, variant, i, opts))
        .count()
}

/// Gauss–Seidel descent on the energy: each vertex moves along its
/// tangential defect with a backtracking line search, then the next vertex
/// is updated with the new position.
pub fn solve_harmonic(
    ms: &MarkedSurface,
    c: &EdgeWeights,
    variant: &EnergyVariant,
    f0: &[MinkVec],
    opts: &SolverOptions,
) -> Result<HarmonicSolution> {
    let n = ms.complex.n_vertices();
    if f0.len() != n {
        return Err(Error::Domain(format!("{} positions for {n} vertices", f0.len())));
    }
    let mut f: Vec<MinkVec> = f0
        .iter()
        .map(|x| project_hyperboloid(x).map(|p| p.into_vec()))
        .collect::<Result<_>>()?;
    let mut energy = dirichlet_energy(ms, &f, c, variant, opts.min_length)?;
    let mut history = vec![energy];
    let mut residual = harmonic_residual(ms, &f, c, variant);
    let mut accepted = 0;
    let mut sweeps = 0;
    let mut best = residual;
    let mut since_best = 0;
    while residual > opts.tol {
        if sweeps >= opts.max_sweeps {
            return Err(Error::Convergence {
                iterations: sweeps,
                residual,
            });
        }
        sweeps += 1;
        let k = gauss_seidel_sweep(ms, &mut f, c, variant, opts);
        accepted += k;
        energy = dirichlet_energy(ms, &f, c, variant, opts.min_length)?;
        history.push(energy);
        residual = harmonic_residual(ms, &f, c, variant);
        // the max residual is not monotone under Gauss–Seidel; give up only
        // after a long run without a new best or when nothing moves
        if residual < best {
            best = residual;
            since_best = 0;
        } else {
            since_best += 1;
        }
        if k == 0 || since_best >= 50 {
            return Err(Error::Convergence {
                iterations: sweeps,
                residual,
            });
        }
    }
    Ok(HarmonicSolution {
        positions: f,
        sweeps,
        accepted_steps: accepted,
        residual,
        energy,
        energy_history: history,
    })
}

/// Starting positions from repeated weighted averaging of neighbors.
///
/// All vertices start at the base point; every sweep replaces `f_i` by the
/// normalized weighted sum of `ρ(g_h) f_j`, which is future time-like.
pub fn initial_positions(ms: &MarkedSurface, c: &EdgeWeights, sweeps: usize) -> Vec<MinkVec> {
    let n = ms.complex.n_vertices();
    let mut f = vec![E0; n];
    for _ in 0..sweeps {
        for i in 0..n {
            let s: MinkVec = ms
                .complex
                .outgoing(i)
                .into_iter()
                .map(|h| c.get(ms.complex.edge(h)) * far_end(ms, &f, h))
                .sum();
            if let Ok(p) = project_hyperboloid(&s) {
                f[i] = p.into_vec();
            }
        }
    }
    f
}

/// Independent random points within hyperbolic distance `radius` of the
/// base point.
pub fn random_positions(n: usize, seed: u64, radius: f64) -> Vec<MinkVec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            MinkVec::new(r.sinh() * t.cos(), r.sinh() * t.sin(), r.cosh())
        })
        .collect()
}

/// Default start: averaged positions, falling back to random ones if an
/// edge collapses.
pub fn default_start(ms: &MarkedSurface, c: &EdgeWeights, min_length: f64) -> Vec<MinkVec> {
    let f = initial_positions(ms, c, 20);
    if edge_lengths(ms, &f, min_length).is_ok() {
        return f;
    }
    random_positions(ms.complex.n_vertices(), 0, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::minkowski::{tangent_frame, HyperboloidPoint, Isometry};

    fn setup() -> (MarkedSurface, EdgeWeights) {
        let ms = MarkedSurface::regular(fixtures::octagon_with_center()).unwrap();
        let c = EdgeWeights::uniform(ms.complex.n_edges(), 1.0);
        (ms, c)
    }

    #[test]
    fn weights_must_be_positive() {
        assert!(EdgeWeights::new(vec![1.0, 0.0]).is_err());
        assert!(EdgeWeights::new(vec![1.0, f64::NAN]).is_err());
        assert!(EdgeWeights::new(vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn lengths_and_degenerate_edges() {
        let (ms, _) = setup();
        let tree_h = (0..ms.complex.n_half_edges())
            .find(|&h| ms.basis.tree[ms.complex.edge(h)])
            .unwrap();
        let f = vec![E0; 2];
        assert!(matches!(
            edge_length(&ms, &f, tree_h, 1e-8),
            Err(Error::DegenerateEdge { .. })
        ));
        let i = ms.complex.origin(tree_h);
        let mut f = vec![E0; 2];
        f[1 - i] = *HyperboloidPoint::polar(1.0, 0.0).vec();
        assert!((edge_length(&ms, &f, tree_h, 1e-8).unwrap() - 1.0).abs() < 1e-14);
        let f = random_positions(2, 3, 1.0);
        for h in 0..ms.complex.n_half_edges() {
            let a = edge_length(&ms, &f, h, 1e-8).unwrap();
            let b = edge_length(&ms, &f, ms.complex.twin(h), 1e-8).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_is_linear_in_weights() {
        let (ms, c) = setup();
        let f = random_positions(2, 1, 1.0);
        let e1 = dirichlet_energy(&ms, &f, &c, &EnergyVariant::Quadratic, 1e-8).unwrap();
        let e2 = dirichlet_energy(&ms, &f, &c.scaled(2.5), &EnergyVariant::Quadratic, 1e-8).unwrap();
        assert!((e2 - 2.5 * e1).abs() < 1e-12 * e2);
    }

    #[test]
    fn residual_is_the_energy_gradient() {
        let (ms, c) = setup();
        let f = random_positions(2, 2, 1.0);
        for variant in [EnergyVariant::Quadratic, EnergyVariant::SinhHalfSquared] {
            for i in 0..2 {
                let d = tangential_defect(&ms, &f, &c, &variant, i);
                for v in tangent_frame(&f[i]) {
                    let t = 1e-6;
                    let mut fp = f.clone();
                    fp[i] = exp_map(&f[i], &(t * v));
                    let mut fm = f.clone();
                    fm[i] = exp_map(&f[i], &(-t * v));
                    let ep = dirichlet_energy(&ms, &fp, &c, &variant, 1e-8).unwrap();
                    let em = dirichlet_energy(&ms, &fm, &c, &variant, 1e-8).unwrap();
                    let fd = (ep - em) / (2.0 * t);
                    let an = -inner(&d, &v);
                    assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0), "{fd} {an}");
                }
            }
        }
    }

    #[test]
    fn characterizations_have_equal_norms() {
        let (ms, c) = setup();
        let f = random_positions(2, 5, 1.0);
        let q = EnergyVariant::Quadratic;
        for i in 0..2 {
            let r = norm(&residual_vector(&ms, &f, &c, &q, i));
            let t = norm(&tangential_defect(&ms, &f, &c, &q, i));
            assert!((r - t).abs() < 1e-12 * r.max(1.0));
        }
    }

    #[test]
    fn lagrange_multiplier_two_ways() {
        let (ms, c) = setup();
        let f = random_positions(2, 6, 1.0);
        let q = EnergyVariant::Quadratic;
        for i in 0..2 {
            let mu = lagrange_multiplier(&ms, &f, &c, &q, i);
            let alt: f64 = ms
                .complex
                .outgoing(i)
                .into_iter()
                .map(|h| {
                    let l = raw_length(&ms, &f, h);
                    edge_coefficient(&ms, &f, &c, &q, h) * (l.cosh() - 1.0)
                })
                .sum();
            assert!((mu - alt).abs() < 1e-12 * mu.abs().max(1.0));
            let small = lagrange_multiplier(&ms, &f, &c.scaled(1e-12), &q, i);
            assert!(small.abs() < 1e-9);
        }
    }

    #[test]
    fn solver_converges_and_is_unique() {
        let (ms, c) = setup();
        let q = EnergyVariant::Quadratic;
        let opts = SolverOptions::default();
        let start = default_start(&ms, &c, 1e-8);
        let sol = solve_harmonic(&ms, &c, &q, &start, &opts).unwrap();
        assert!(sol.residual <= 1e-10);
        for w in sol.energy_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0]);
        }
        let again = solve_harmonic(&ms, &c, &q, &sol.positions, &opts).unwrap();
        assert_eq!(again.accepted_steps, 0);

        let other = solve_harmonic(&ms, &c, &q, &random_positions(2, 11, 0.7), &opts).unwrap();
        for (a, b) in sol.positions.iter().zip(&other.positions) {
            assert!((a - b).amax() < 1e-8, "{a} {b}");
        }
    }

    #[test]
    fn gauge_invariance() {
        let (ms, c) = setup();
        let q = EnergyVariant::Quadratic;
        let f = random_positions(2, 7, 1.0);
        let h = Isometry::rotation(0.4) * Isometry::boost(0.3);
        let ms2 = ms.with_rep(ms.rep.conjugate(&h)).unwrap();
        let f2: Vec<MinkVec> = f.iter().map(|x| h.apply(x)).collect();
        let e1 = dirichlet_energy(&ms, &f, &c, &q, 1e-8).unwrap();
        let e2 = dirichlet_energy(&ms2, &f2, &c, &q, 1e-8).unwrap();
        assert!((e1 - e2).abs() < 1e-8 * e1, "{e1} {e2}");
        let r1 = harmonic_residual(&ms, &f, &c, &q);
        let r2 = harmonic_residual(&ms2, &f2, &c, &q);
        assert!((r1 - r2).abs() < 1e-8 * r1.max(1.0));
    }
}
