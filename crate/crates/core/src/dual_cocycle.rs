//! The dual surface of a harmonic realization and its translation cocycle.
//!
//! Dual vertices sit on faces. The half-edge `h` separates its left face
//! `face(h)` from the face of `twin(h)`, and the dual edge vector is
//! `a_h = f†(left) - f†(right) = k_h f_i × ρ(g_h) f_j`.
//!
//! Positions are stored in the frame of the fundamental domain cut along
//! the dual spanning tree; vertex `i` seen at corner `h` is `ρ(M_h) f_i`.

use crate::energy::EnergyVariant;
use crate::error::{Error, Result};
use crate::fuchsian::{coboundary_project, extend_cocycle, GeneratorCocycle};
use crate::harmonic::{edge_coefficient, far_end, residual_vector, EdgeWeights};
use crate::minkowski::{cross, norm, MinkVec};
use crate::surface::MarkedSurface;

/// `a_h` in the frame of the origin of `h`.
pub fn edge_dual_vector(
    ms: &MarkedSurface,
    f: &[MinkVec],
    c: &EdgeWeights,
    variant: &EnergyVariant,
    h: usize,
    min_length: f64,
) -> Result<MinkVec> {
    crate::harmonic::edge_length(ms, f, h, min_length)?;
    let i = ms.complex.origin(h);
    Ok(edge_coefficient(ms, f, c, variant, h) * cross(&f[i], &far_end(ms, f, h)))
}

#[derive(Clone, Debug)]
pub struct DualRealization {
    /// `f†` per face, in the fundamental-domain frame.
    pub faces: Vec<MinkVec>,
    /// `a_h` per half-edge in the frame of its origin.
    pub edge_vectors: Vec<MinkVec>,
    /// Closure defect of the dual face around each vertex.
    pub closure: Vec<f64>,
}

impl DualRealization {
    pub fn max_closure(&self) -> f64 {
        self.closure.iter().copied().fold(0.0, f64::max)
    }

    /// `a_h` carried into the fundamental domain: `ρ(M_h) a_h`.
    pub fn edge_vector_in_domain(&self, ms: &MarkedSurface, h: usize) -> MinkVec {
        ms.corner_matrix(h).apply(&self.edge_vectors[h])
    }

    /// Adds a constant vector to every dual vertex.
    pub fn translated(&self, v: &MinkVec) -> Self {
        DualRealization {
            faces: self.faces.iter().map(|x| x + v).collect(),
            ..self.clone()
        }
    }
}

/// Integrates `a` over the dual spanning tree with `f†(base face) = anchor`.
pub fn integrate_dual(
    ms: &MarkedSurface,
    f: &[MinkVec],
    c: &EdgeWeights,
    variant: &EnergyVariant,
    anchor: MinkVec,
    min_length: f64,
) -> Result<DualRealization> {
    let cx = &ms.complex;
    let edge_vectors = (0..cx.n_half_edges())
        .map(|h| edge_dual_vector(ms, f, c, variant, h, min_length))
        .collect::<Result<Vec<_>>>()?;
    let mut real = DualRealization {
        faces: vec![MinkVec::zeros(); cx.n_faces()],
        edge_vectors,
        closure: (0..cx.n_vertices())
            .map(|i| norm(&residual_vector(ms, f, c, variant, i)))
            .collect(),
    };
    real.faces[ms.basis.base_face] = anchor;
    for &phi in &ms.basis.face_order {
        if let Some(h) = ms.basis.face_parent_half[phi] {
            // h has the parent on its left, phi on its right
            let parent = cx.face(h);
            real.faces[phi] = real.faces[parent] - real.edge_vector_in_domain(ms, h);
        }
    }
    Ok(real)
}

/// `τ_r = f†(left) - a_h - ρ(x_r) f†(right)` on the leftover half-edge of
/// generator `r`; this makes `f†(γφ) = ρ_γ f†(φ) + τ_γ` on the cover.
pub fn tau_from_dual(ms: &MarkedSurface, dual: &DualRealization, tol_inner: f64) -> Result<GeneratorCocycle> {
    if dual.max_closure() > 100.0 * tol_inner {
        return Err(Error::Closure(dual.max_closure()));
    }
    Ok(tau_unchecked(ms, dual))
}

fn tau_unchecked(ms: &MarkedSurface, dual: &DualRealization) -> GeneratorCocycle {
    let cx = &ms.complex;
    GeneratorCocycle {
        values: ms
            .basis
            .leftover
            .iter()
            .map(|&e| {
                let h = cx.edge_half(e);
                let left = dual.faces[cx.face(h)];
                let right = dual.faces[cx.face(cx.twin(h))];
                left - dual.edge_vector_in_domain(ms, h) - ms.transition_matrix(h).apply(&right)
            })
            .collect(),
    }
}

/// Derivative of the inner-solved energy along the deformation `σ`:
/// `Σ_e <σ_{g_h}, a_h>` over canonical half-edges.
pub fn pairing_derivative(ms: &MarkedSurface, dual: &DualRealization, sigma: &GeneratorCocycle) -> f64 {
    let cx = &ms.complex;
    (0..cx.n_edges())
        .map(|e| {
            let h = cx.edge_half(e);
            let s = extend_cocycle(&ms.rep, sigma, &ms.labels.label[h]);
            crate::minkowski::inner(&s, &dual.edge_vectors[h])
        })
        .sum()
}

/// The translate of `f†` whose translation cocycle is the reduced part of
/// `τ`; `τ` vanishes there exactly when its class does.
#[derive(Clone, Debug)]
pub struct EquivariantDual {
    pub dual: DualRealization,
    pub tau: GeneratorCocycle,
    /// Distance of `τ` from the coboundaries.
    pub residual: f64,
}

pub fn equivariant_dual(ms: &MarkedSurface, dual: &DualRealization, tol_inner: f64) -> Result<EquivariantDual> {
    let tau = tau_from_dual(ms, dual, tol_inner)?;
    let p = coboundary_project(&ms.rep, &tau)?;
    let shifted = dual.translated(&(-p.s0));
    let tau = tau_unchecked(ms, &shifted);
    Ok(EquivariantDual {
        dual: shifted,
        tau,
        residual: p.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::fuchsian::{coboundary_cocycle, cocycle_relator_residual};
    use crate::harmonic::{default_start, dirichlet_energy, solve_harmonic, random_positions, SolverOptions};
    use crate::minkowski::inner;

    fn solved(variant: &EnergyVariant) -> (MarkedSurface, EdgeWeights, Vec<MinkVec>) {
        let ms = MarkedSurface::regular(fixtures::octagon_with_center()).unwrap();
        let c = EdgeWeights::new((0..ms.complex.n_edges()).map(|e| 1.0 + 0.1 * e as f64).collect()).unwrap();
        let f0 = default_start(&ms, &c, 1e-8);
        let sol = solve_harmonic(&ms, &c, variant, &f0, &SolverOptions::default()).unwrap();
        (ms, c, sol.positions)
    }

    #[test]
    fn dual_edge_vectors() {
        let ms = MarkedSurface::regular(fixtures::octagon_with_center()).unwrap();
        let c = EdgeWeights::uniform(ms.complex.n_edges(), 1.3);
        let f = random_positions(2, 4, 1.0);
        for variant in [EnergyVariant::Quadratic, EnergyVariant::SinhHalfSquared] {
            for h in 0..ms.complex.n_half_edges() {
                let a = edge_dual_vector(&ms, &f, &c, &variant, h, 1e-8).unwrap();
                let l = crate::harmonic::edge_length(&ms, &f, h, 1e-8).unwrap();
                assert!((norm(&a) - variant.derivative(1.3, l)).abs() < 1e-10 * norm(&a).max(1.0));
                let i = ms.complex.origin(h);
                assert!(inner(&a, &f[i]).abs() < 1e-10 * norm(&a).max(1.0));
                assert!(inner(&a, &far_end(&ms, &f, h)).abs() < 1e-9 * norm(&a).max(1.0));
                // in the common frame the twin's vector is opposite
                let t = ms.complex.twin(h);
                let at = edge_dual_vector(&ms, &f, &c, &variant, t, 1e-8).unwrap();
                let back = ms.label_matrix(h).apply(&at);
                assert!((a + back).amax() < 1e-9 * a.amax().max(1.0));
            }
        }
    }

    #[test]
    fn closure_equals_residual() {
        let ms = MarkedSurface::regular(fixtures::octagon_with_center()).unwrap();
        let c = EdgeWeights::uniform(ms.complex.n_edges(), 1.0);
        let q = EnergyVariant::Quadratic;
        let f = random_positions(2, 8, 1.0);
        let d = integrate_dual(&ms, &f, &c, &q, MinkVec::zeros(), 1e-8).unwrap();
        for i in 0..2 {
            let r = norm(&residual_vector(&ms, &f, &c, &q, i));
            assert!((d.closure[i] - r).abs() < 1e-12);
        }
        assert!(matches!(tau_from_dual(&ms, &d, 1e-10), Err(Error::Closure(_))));
    }

    #[test]
    fn domain_is_consistent_around_faces_and_vertices() {
        let (ms, c, f) = solved(&EnergyVariant::Quadratic);
        let d = integrate_dual(&ms, &f, &c, &EnergyVariant::Quadratic, MinkVec::zeros(), 1e-8).unwrap();
        let cx = &ms.complex;
        // every non-cut dual edge also closes up inside the domain
        for e in 0..cx.n_edges() {
            if ms.basis.cotree[e] {
                let h = cx.edge_half(e);
                let diff = d.faces[cx.face(h)] - d.faces[cx.face(cx.twin(h))];
                assert!((diff - d.edge_vector_in_domain(&ms, h)).amax() < 1e-9);
            }
        }
        let moved = integrate_dual(&ms, &f, &c, &EnergyVariant::Quadratic, MinkVec::new(1.0, 2.0, 3.0), 1e-8).unwrap();
        for (a, b) in d.faces.iter().zip(&moved.faces) {
            assert!((b - a - MinkVec::new(1.0, 2.0, 3.0)).amax() < 1e-12);
        }
    }

    #[test]
    fn tau_is_a_cocycle_and_shifts_by_coboundaries() {
        let (ms, c, f) = solved(&EnergyVariant::Quadratic);
        let d = integrate_dual(&ms, &f, &c, &EnergyVariant::Quadratic, MinkVec::zeros(), 1e-8).unwrap();
        let tau = tau_from_dual(&ms, &d, 1e-10).unwrap();
        assert!(cocycle_relator_residual(&ms.rep, &tau) < 1e-8 * tau.max_abs().max(1.0));

        let v = MinkVec::new(0.3, -0.2, 0.5);
        let tau2 = tau_from_dual(&ms, &d.translated(&v), 1e-10).unwrap();
        let diff = tau2.add(&tau.scaled(-1.0));
        assert!(diff.add(&coboundary_cocycle(&ms.rep, &v).scaled(-1.0)).max_abs() < 1e-10);

        let eq = equivariant_dual(&ms, &d, 1e-10).unwrap();
        assert!((eq.tau.norm() - eq.residual).abs() < 1e-9);
        // the regular structure with unequal weights is not optimal
        assert!(eq.residual > 1e-4);
    }

    #[test]
    fn pairing_vanishes_on_coboundaries() {
        let (ms, c, f) = solved(&EnergyVariant::Quadratic);
        let d = integrate_dual(&ms, &f, &c, &EnergyVariant::Quadratic, MinkVec::zeros(), 1e-8).unwrap();
        let sigma = coboundary_cocycle(&ms.rep, &MinkVec::new(0.2, 0.7, -0.4));
        assert!(pairing_derivative(&ms, &d, &sigma).abs() < 1e-8);
        let zero = GeneratorCocycle::zero(4);
        assert_eq!(pairing_derivative(&ms, &d, &zero), 0.0);
    }

    /// Derivative of the energy at a fixed realization is the pairing,
    /// with no need for the inner solve; orientation of `a_h` is fixed here.
    #[test]
    fn pairing_orientation() {
        let (ms, c, f) = solved(&EnergyVariant::SinhHalfSquared);
        let v = EnergyVariant::SinhHalfSquared;
        let d = integrate_dual(&ms, &f, &c, &v, MinkVec::zeros(), 1e-8).unwrap();
        let sigma = GeneratorCocycle {
            values: (0..4).map(|k| MinkVec::new(0.1 * k as f64, 0.2, -0.1)).collect(),
        };
        // large label matrices make smaller steps noisy
        let t = 1e-3;
        let energy_at = |s: f64| {
            let gens = ms
                .rep
                .generators()
                .iter()
                .zip(&sigma.values)
                .map(|(g, x)| crate::minkowski::exp_so21(x, s) * *g)
                .collect();
            let rep = crate::fuchsian::HolonomyRep::from_parts_unchecked(gens, ms.rep.relator().clone());
            let ms2 = ms.with_rep(rep).unwrap();
            dirichlet_energy(&ms2, &f, &c, &v, 1e-8).unwrap()
        };
        let fd = (energy_at(t) - energy_at(-t)) / (2.0 * t);
        let an = pairing_derivative(&ms, &d, &sigma);
        assert!((fd - an).abs() < 1e-5 * an.abs().max(1.0), "{fd} {an}");
    }
}
