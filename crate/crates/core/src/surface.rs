//! A complex together with its tree–cotree cut, word labels and a holonomy
//! representation, with the label matrices evaluated once.

use crate::complex::{assign_labels, tree_cotree, CellComplex, HolonomyLabels, HomologyBasis};
use crate::error::{Error, Result};
use crate::fuchsian::{evaluate_word, regular_rep_for, HolonomyRep};
use crate::minkowski::Isometry;

#[derive(Clone, Debug)]
pub struct MarkedSurface {
    pub complex: CellComplex,
    pub basis: HomologyBasis,
    pub labels: HolonomyLabels,
    pub rep: HolonomyRep,
    label_mats: Vec<Isometry>,
    corner_mats: Vec<Isometry>,
    transition_mats: Vec<Isometry>,
}

impl MarkedSurface {
    /// The relator of `rep` must be the one the labels were built with.
    pub fn new(
        complex: CellComplex,
        basis: HomologyBasis,
        labels: HolonomyLabels,
        rep: HolonomyRep,
    ) -> Result<Self> {
        if rep.relator() != &labels.relator || rep.n_generators() != labels.n_generators {
            return Err(Error::Domain(format!(
                "representation relator {} does not match the complex relator {}",
                rep.relator(),
                labels.relator
            )));
        }
        let mut ms = MarkedSurface {
            complex,
            basis,
            labels,
            rep,
            label_mats: Vec::new(),
            corner_mats: Vec::new(),
            transition_mats: Vec::new(),
        };
        ms.evaluate();
        Ok(ms)
    }

    /// The regular `4g`-gon structure, cut at the base vertex (among the
    /// first 64) whose label matrices have the smallest entries. Large
    /// entries cost digits in every evaluation.
    pub fn regular(complex: CellComplex) -> Result<Self> {
        let mut best: Option<(f64, MarkedSurface)> = None;
        for v in 0..complex.n_vertices().min(64) {
            let ms = Self::regular_with_base(complex.clone(), v, 0)?;
            let size = ms.max_label_entry();
            if best.as_ref().is_none_or(|(s, _)| size < *s) {
                best = Some((size, ms));
            }
        }
        Ok(best.expect("a complex has vertices").1)
    }

    /// Largest absolute entry over all label matrices.
    pub fn max_label_entry(&self) -> f64 {
        self.label_mats.iter().fold(0.0, |m, g| m.max(g.matrix().amax()))
    }

    pub fn regular_with_base(complex: CellComplex, vertex: usize, face: usize) -> Result<Self> {
        let basis = tree_cotree(&complex, vertex, face)?;
        let labels = assign_labels(&complex, &basis);
        let rep = regular_rep_for(&complex, &basis, &labels)?;
        MarkedSurface::new(complex, basis, labels, rep)
    }

    fn evaluate(&mut self) {
        let cx = &self.complex;
        let nh = cx.n_half_edges();
        let mut label = vec![Isometry::identity(); nh];
        let mut trans = vec![Isometry::identity(); nh];
        for e in 0..cx.n_edges() {
            let h = cx.edge_half(e);
            let g = evaluate_word(&self.rep, &self.labels.label[h]);
            label[h] = g;
            label[cx.twin(h)] = g.inverse();
            let t = evaluate_word(&self.rep, &self.labels.transition[h]);
            trans[h] = t;
            trans[cx.twin(h)] = t.inverse();
        }
        self.corner_mats = (0..nh)
            .map(|h| evaluate_word(&self.rep, &self.labels.corner[h]))
            .collect();
        self.label_mats = label;
        self.transition_mats = trans;
    }

    /// Same complex and cut with another representation.
    pub fn with_rep(&self, rep: HolonomyRep) -> Result<Self> {
        MarkedSurface::new(self.complex.clone(), self.basis.clone(), self.labels.clone(), rep)
    }

    /// The same marked surface described through another cut.
    ///
    /// Each face of the new fundamental domain is a translate `Γ_φ` of its
    /// copy in the old one, found by walking the new dual tree; the new
    /// generators are `Γ_left ρ(t_h) Γ_right⁻¹` on the new leftover edges.
    /// Also returns, per vertex, the isometry taking old positions to new.
    pub fn rebased(&self, vertex: usize, face: usize) -> Result<(MarkedSurface, Vec<Isometry>)> {
        let cx = &self.complex;
        let basis = tree_cotree(cx, vertex, face)?;
        let labels = assign_labels(cx, &basis);
        let mut gamma = vec![Isometry::identity(); cx.n_faces()];
        for &phi in &basis.face_order {
            if let Some(h) = basis.face_parent_half[phi] {
                gamma[phi] = gamma[cx.face(h)] * *self.transition_matrix(h);
            }
        }
        let gens = basis
            .leftover
            .iter()
            .map(|&e| {
                let h = cx.edge_half(e);
                (gamma[cx.face(h)] * *self.transition_matrix(h) * gamma[cx.face(cx.twin(h))].inverse())
                    .project()
            })
            .collect();
        let rep = HolonomyRep::from_parts_unchecked(gens, labels.relator.clone());
        let ms = MarkedSurface::new(cx.clone(), basis, labels, rep)?;
        let maps = (0..cx.n_vertices())
            .map(|v| {
                let h = cx.outgoing(v)[0];
                ms.corner_matrix(h).inverse() * gamma[cx.face(h)] * *self.corner_matrix(h)
            })
            .collect();
        Ok((ms, maps))
    }

    /// `ρ(g_h)`.
    pub fn label_matrix(&self, h: usize) -> &Isometry {
        &self.label_mats[h]
    }

    /// `ρ(M_h)`.
    pub fn corner_matrix(&self, h: usize) -> &Isometry {
        &self.corner_mats[h]
    }

    /// `ρ(t_h)`.
    pub fn transition_matrix(&self, h: usize) -> &Isometry {
        &self.transition_mats[h]
    }

    pub fn genus(&self) -> usize {
        self.complex.genus()
    }
}
