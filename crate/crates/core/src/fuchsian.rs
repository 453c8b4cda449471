//! Holonomy representations of the surface group, generator cocycles and
//! their coboundary projection.
//!
//! Lie algebra values are η-images, so `Ad ρ` acts on them as the matrix
//! `ρ` itself.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::complex::{domain_boundary, CellComplex, HolonomyLabels, HomologyBasis};
use crate::error::{Error, Result};
use crate::minkowski::{exp_so21, inner, lie_vector, max_abs, Isometry, LieVec, MinkVec};
use crate::word::{standard_relator, Word};

#[derive(Clone, Debug, PartialEq)]
pub struct HolonomyRep {
    gens: Vec<Isometry>,
    relator: Word,
}

impl HolonomyRep {
    /// Checks every generator and the relator residual.
    pub fn new(gens: Vec<Isometry>, relator: Word, tol_iso: f64, tol_rel: f64) -> Result<Self> {
        for (k, g) in gens.iter().enumerate() {
            Isometry::from_matrix(*g.matrix(), tol_iso)
                .map_err(|e| Error::Domain(format!("generator {}: {e}", k + 1)))?;
        }
        if relator.max_generator() > gens.len() {
            return Err(Error::Domain("relator uses an undefined generator".into()));
        }
        let rep = HolonomyRep { gens, relator };
        let r = rep.relator_residual();
        if r > tol_rel {
            return Err(Error::Domain(format!("relator residual {r:e} exceeds tolerance")));
        }
        Ok(rep)
    }

    pub fn from_parts_unchecked(gens: Vec<Isometry>, relator: Word) -> Self {
        HolonomyRep { gens, relator }
    }

    pub fn generators(&self) -> &[Isometry] {
        &self.gens
    }

    pub fn generator(&self, k: usize) -> &Isometry {
        &self.gens[k]
    }

    pub fn n_generators(&self) -> usize {
        self.gens.len()
    }

    pub fn genus(&self) -> usize {
        self.gens.len() / 2
    }

    pub fn relator(&self) -> &Word {
        &self.relator
    }

    /// `|ρ(relator) - I|_inf`.
    pub fn relator_residual(&self) -> f64 {
        evaluate_word(self, &self.relator).distance_to_identity()
    }

    /// `h ρ h^{-1}`.
    pub fn conjugate(&self, h: &Isometry) -> Self {
        let hi = h.inverse();
        HolonomyRep {
            gens: self.gens.iter().map(|g| h * &(g * &hi)).collect(),
            relator: self.relator.clone(),
        }
    }
}

fn letter(rep: &HolonomyRep, l: i32) -> Isometry {
    let g = rep.gens[l.unsigned_abs() as usize - 1];
    if l > 0 {
        g
    } else {
        g.inverse()
    }
}

/// Product of generator matrices in word order.
pub fn evaluate_word(rep: &HolonomyRep, w: &Word) -> Isometry {
    w.letters()
        .iter()
        .fold(Isometry::identity(), |acc, &l| acc * letter(rep, l))
}

/// Side-pairing elements of the regular `4g`-gon with interior angles
/// `2π/4g`, centered at the origin with corner `k` at angle `2πk/4g`.
///
/// `crossing(k, j)` maps side `j` onto side `k` and the polygon onto its
/// neighbor across side `k`.
#[derive(Clone, Copy, Debug)]
pub struct RegularPolygon {
    pub n: usize,
    pub inradius: f64,
    pub circumradius: f64,
}

impl RegularPolygon {
    pub fn new(genus: usize) -> Self {
        let n = 4 * genus;
        let a = std::f64::consts::PI / n as f64;
        let cot = 1.0 / a.tan();
        RegularPolygon {
            n,
            inradius: cot.acosh(),
            circumradius: (cot * cot).acosh(),
        }
    }

    fn side_angle(&self, k: usize) -> f64 {
        (2 * k + 1) as f64 * std::f64::consts::PI / self.n as f64
    }

    pub fn crossing(&self, k: usize, j: usize) -> Isometry {
        Isometry::rotation(self.side_angle(k))
            * Isometry::boost(2.0 * self.inradius)
            * Isometry::rotation(std::f64::consts::PI - self.side_angle(j))
    }

    pub fn corner(&self, k: usize) -> Vector3<f64> {
        let t = 2.0 * std::f64::consts::PI * k as f64 / self.n as f64;
        let (s, c) = (self.circumradius.sinh(), self.circumradius.cosh());
        Vector3::new(s * t.cos(), s * t.sin(), c)
    }
}

/// The regular `4g`-gon group with relator `[x1,x2]...[x_{2g-1},x_{2g}]`.
pub fn build_regular_4g_group(genus: usize) -> Result<HolonomyRep> {
    if genus < 2 {
        return Err(Error::Genus(genus as i64));
    }
    let p = RegularPolygon::new(genus);
    let mut gens = Vec::with_capacity(2 * genus);
    for m in 0..genus {
        gens.push(p.crossing(4 * m, 4 * m + 2));
        gens.push(p.crossing(4 * m + 3, 4 * m + 1));
    }
    let rep = HolonomyRep {
        gens,
        relator: standard_relator(genus),
    };
    Ok(rep)
}

/// The regular `4g`-gon structure transported to an arbitrary complex:
/// contracting the primal tree turns the fundamental domain into a `4g`-gon
/// whose sides are the leftover edges, and each generator becomes the
/// crossing of the regular polygon through the corresponding side.
pub fn regular_rep_for(
    cx: &CellComplex,
    basis: &HomologyBasis,
    labels: &HolonomyLabels,
) -> Result<HolonomyRep> {
    let genus = cx.genus();
    let sides: Vec<usize> = domain_boundary(cx, basis)
        .into_iter()
        .filter(|&h| !basis.tree[cx.edge(h)])
        .collect();
    let p = RegularPolygon::new(genus);
    debug_assert_eq!(sides.len(), p.n);
    let index_of = |h: usize| sides.iter().position(|&s| s == h).expect("leftover side on boundary");
    let gens = basis
        .leftover
        .iter()
        .map(|&e| {
            let h = cx.edge_half(e);
            p.crossing(index_of(h), index_of(cx.twin(h)))
        })
        .collect();
    let rep = HolonomyRep {
        gens,
        relator: labels.relator.clone(),
    };
    if rep.relator_residual() <= 1e-9 {
        return Ok(rep);
    }
    renormalize_relator(&rep, 1e-9)
}

/// Lie-algebra values on the generators.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorCocycle {
    pub values: Vec<LieVec>,
}

impl GeneratorCocycle {
    pub fn zero(n: usize) -> Self {
        GeneratorCocycle {
            values: vec![Vector3::zeros(); n],
        }
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        GeneratorCocycle {
            values: v
                .as_slice()
                .chunks(3)
                .map(|c| Vector3::new(c[0], c[1], c[2]))
                .collect(),
        }
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(
            3 * self.values.len(),
            self.values.iter().flat_map(|v| v.iter().copied()),
        )
    }

    pub fn scaled(&self, s: f64) -> Self {
        GeneratorCocycle {
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        GeneratorCocycle {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    /// Euclidean norm of the stacked coordinates.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.amax()))
    }

    /// Pushes forward by `Ad h`, matching a conjugated representation.
    pub fn transported(&self, h: &Isometry) -> Self {
        GeneratorCocycle {
            values: self.values.iter().map(|v| h.apply(v)).collect(),
        }
    }
}

/// Extends the cocycle along a word with `σ_{ab} = σ_a + Ad ρ_a σ_b`.
pub fn extend_cocycle(rep: &HolonomyRep, c: &GeneratorCocycle, w: &Word) -> LieVec {
    let mut acc = Vector3::zeros();
    let mut g = Isometry::identity();
    for &l in w.letters() {
        let k = l.unsigned_abs() as usize - 1;
        let s = if l > 0 {
            c.values[k]
        } else {
            -rep.gens[k].inverse().apply(&c.values[k])
        };
        acc += g.apply(&s);
        g = g * letter(rep, l);
    }
    acc
}

/// Euclidean norm of the cocycle extended over the relator.
pub fn cocycle_relator_residual(rep: &HolonomyRep, c: &GeneratorCocycle) -> f64 {
    extend_cocycle(rep, c, &rep.relator).norm()
}

/// `s_k = s0 - Ad ρ_{x_k} s0`.
pub fn coboundary_cocycle(rep: &HolonomyRep, s0: &LieVec) -> GeneratorCocycle {
    GeneratorCocycle {
        values: rep.gens.iter().map(|g| s0 - g.apply(s0)).collect(),
    }
}

/// The `3·2g × 3` matrix of `s0 ↦ coboundary_cocycle(s0)`.
pub fn coboundary_matrix(rep: &HolonomyRep) -> DMatrix<f64> {
    let n = rep.gens.len();
    let mut b = DMatrix::zeros(3 * n, 3);
    for (k, g) in rep.gens.iter().enumerate() {
        let blk = Matrix3::identity() - g.matrix();
        b.view_mut((3 * k, 0), (3, 3)).copy_from(&blk);
    }
    b
}

/// The `3 × 3·2g` matrix of the linear map `c ↦ extend_cocycle(c, relator)`.
pub fn relator_jacobian(rep: &HolonomyRep) -> DMatrix<f64> {
    let n = 3 * rep.gens.len();
    let mut l = DMatrix::zeros(3, n);
    for j in 0..n {
        let mut e = DVector::zeros(n);
        e[j] = 1.0;
        let col = extend_cocycle(rep, &GeneratorCocycle::from_vector(&e), &rep.relator);
        l.column_mut(j).copy_from(&col);
    }
    l
}

/// Orthogonal projection onto the cocycles of `rep`, the kernel of the
/// linearized relator.
pub fn project_to_cocycles(rep: &HolonomyRep, c: &GeneratorCocycle) -> Result<GeneratorCocycle> {
    let l = relator_jacobian(rep);
    let x = c.to_vector();
    let y = (&l * l.transpose())
        .lu()
        .solve(&(&l * &x))
        .ok_or_else(|| Error::Rank("relator jacobian is singular".into()))?;
    Ok(GeneratorCocycle::from_vector(&(x - l.transpose() * y)))
}

/// Result of [`coboundary_project`].
#[derive(Clone, Debug, PartialEq)]
pub struct CoboundaryProjection {
    pub s0: LieVec,
    pub residual: f64,
    pub reduced: GeneratorCocycle,
}

/// The future unit time-like eigenvector of `Σ_k (ρ_k + ρ_k⁻¹)`. The sum
/// maps the future cone into itself, so this eigenvector exists; conjugating
/// the representation by `g` moves it to `g p`.
pub fn rep_center(rep: &HolonomyRep) -> Result<MinkVec> {
    let a = rep
        .gens
        .iter()
        .fold(Matrix3::zeros(), |acc, g| acc + g.matrix() + g.inverse().matrix());
    let mut best: Option<(f64, MinkVec)> = None;
    for lambda in a.complex_eigenvalues().iter().filter(|z| z.im.abs() <= 1e-9 * z.re.abs().max(1.0)) {
        let svd = (a - Matrix3::identity() * lambda.re).svd(false, true);
        let vt = svd.v_t.ok_or_else(|| Error::Rank("eigenvector".into()))?;
        let k = svd.singular_values.imin();
        let v: MinkVec = vt.row(k).transpose();
        let n2 = inner(&v, &v);
        if n2 < 0.0 && best.as_ref().is_none_or(|(m, _)| n2 / v.norm_squared() < *m) {
            let v = v / (-n2).sqrt();
            best = Some((n2 / v.norm_squared(), if v[2] < 0.0 { -v } else { v }));
        }
    }
    best.map(|(_, v)| v)
        .ok_or_else(|| Error::Rank("no time-like eigenvector; the group is elementary".into()))
}

/// Least-squares fit of a coboundary, in the Euclidean norm on stacked
/// coordinates taken in the frame that moves [`rep_center`] to the base
/// point. That frame makes the fit covariant under conjugation.
/// `residual` is zero exactly when the class vanishes.
pub fn coboundary_project(rep: &HolonomyRep, c: &GeneratorCocycle) -> Result<CoboundaryProjection> {
    let frame = Isometry::recentering(&rep_center(rep)?);
    let p = coboundary_project_raw(&rep.conjugate(&frame), &c.transported(&frame))?;
    let back = frame.inverse();
    Ok(CoboundaryProjection {
        s0: back.apply(&p.s0),
        residual: p.residual,
        reduced: p.reduced.transported(&back),
    })
}

fn coboundary_project_raw(rep: &HolonomyRep, c: &GeneratorCocycle) -> Result<CoboundaryProjection> {
    let b = coboundary_matrix(rep);
    let svd = b.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-12 * smax.max(1.0) {
        return Err(Error::Rank(format!(
            "coboundary map is singular (singular values {smax:e} .. {smin:e})"
        )));
    }
    let y = c.to_vector();
    let x = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::Rank(e.to_string()))?;
    let s0 = Vector3::new(x[0], x[1], x[2]);
    let r = y - &b * x;
    Ok(CoboundaryProjection {
        s0,
        residual: r.norm(),
        reduced: GeneratorCocycle::from_vector(&r),
    })
}

/// Restores the relator after a finite deformation.
///
/// Each Newton step applies the minimum-norm correction
/// `R_k ← exp(v_k) R_k` over all generators that cancels the linearized
/// relator defect, then re-orthonormalizes every generator.
pub fn renormalize_relator(rep: &HolonomyRep, tol_rel: f64) -> Result<HolonomyRep> {
    let mut cur = HolonomyRep {
        gens: rep.gens.iter().map(|g| g.project()).collect(),
        relator: rep.relator.clone(),
    };
    let target = (tol_rel * 1e-4).max(1e-14);
    let mut res = cur.relator_residual();
    let mut best = (res, cur.clone());
    let mut stalled = 0;
    for _ in 0..50 {
        if res <= target || stalled >= 3 {
            break;
        }
        let x = evaluate_word(&cur, &cur.relator);
        let xi = x.inverse();
        let d = lie_vector(&((x.matrix() - xi.matrix()) * 0.5));
        let l = relator_jacobian(&cur);
        let llt = &l * l.transpose();
        let y = llt
            .lu()
            .solve(&DVector::from_column_slice(d.as_slice()))
            .ok_or_else(|| Error::Rank("relator jacobian is singular".into()))?;
        let v = -(l.transpose() * y);
        let step = GeneratorCocycle::from_vector(&v);
        cur = HolonomyRep {
            gens: cur
                .gens
                .iter()
                .zip(&step.values)
                .map(|(g, s)| (exp_so21(s, 1.0) * *g).project())
                .collect(),
            relator: cur.relator.clone(),
        };
        res = cur.relator_residual();
        if res < best.0 {
            best = (res, cur.clone());
            stalled = 0;
        } else {
            stalled += 1;
        }
    }
    if best.0 <= tol_rel {
        Ok(best.1)
    } else {
        Err(Error::Convergence {
            iterations: 50,
            residual: best.0,
        })
    }
}

/// Singular values in decreasing order and the numerical rank at the
/// largest gap.
#[derive(Clone, Debug, PartialEq)]
pub struct RankReport {
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// Ratio between the last kept and the first dropped singular value.
    pub gap: f64,
}

pub fn numerical_rank(m: &DMatrix<f64>) -> RankReport {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let floor = f64::MIN_POSITIVE;
    let mut rank = sv.len();
    let mut gap = f64::INFINITY;
    for i in 0..sv.len().saturating_sub(1) {
        let ratio = sv[i] / sv[i + 1].max(floor);
        if ratio > 1e6 && (gap.is_infinite() || ratio > gap) {
            rank = i + 1;
            gap = ratio;
        }
    }
    if gap.is_infinite() && sv.first().is_some_and(|&s| s <= floor) {
        rank = 0;
    }
    RankReport {
        singular_values: sv,
        rank,
        gap,
    }
}

/// Sup-norm distance between two representations, generator by generator.
pub fn rep_distance(a: &HolonomyRep, b: &HolonomyRep) -> f64 {
    a.gens
        .iter()
        .zip(&b.gens)
        .fold(0.0, |m, (x, y)| m.max(max_abs(&(x.matrix() - y.matrix()))))
}
