//! Weighted Delaunay certificates read off an equivariant dual surface, and
//! the canonical edge weights of a Delaunay decomposition.
//!
//! Everything is evaluated in the fundamental-domain frame: vertex `i` at
//! corner `h` sits at `ρ(M_h) f_i`, and the copy of the right face of `h`
//! that touches its left face is `ρ(t_h) f†(right)`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::dual_cocycle::DualRealization;
use crate::error::{Error, Result};
use crate::harmonic::{edge_lengths, far_end, EdgeWeights};
use crate::minkowski::{acosh_stable, cross, inner, MinkVec};
use crate::surface::MarkedSurface;

/// Vertex `origin(h)` in the frame of the fundamental domain.
fn corner_point(ms: &MarkedSurface, f: &[MinkVec], h: usize) -> MinkVec {
    ms.corner_matrix(h).apply(&f[ms.complex.origin(h)])
}

/// `f†(left) - ρ(t_h) f†(right)` across the half-edge `h`, in the domain
/// frame.
pub fn dual_edge_difference(ms: &MarkedSurface, dual: &DualRealization, h: usize) -> MinkVec {
    let cx = &ms.complex;
    dual.faces[cx.face(h)] - ms.transition_matrix(h).apply(&dual.faces[cx.face(cx.twin(h))])
}

/// `‖Δf†‖` of edge `e`, failing unless the difference is space-like.
pub fn dual_edge_length(ms: &MarkedSurface, dual: &DualRealization, e: usize) -> Result<f64> {
    let d = dual_edge_difference(ms, dual, ms.complex.edge_half(e));
    let n2 = inner(&d, &d);
    if n2 <= 0.0 {
        return Err(Error::NonSpacelike { edge: e, norm2: n2 });
    }
    Ok(n2.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexWeights {
    pub delta: Vec<f64>,
    /// Max minus min of the per-corner estimates.
    pub spread: Vec<f64>,
}

impl VertexWeights {
    pub fn max_spread(&self) -> f64 {
        self.spread.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.delta.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Per-corner values `-<f†(face(h)), ρ(M_h) f_i>`, grouped by vertex.
pub fn corner_weights(ms: &MarkedSurface, f: &[MinkVec], dual: &DualRealization) -> Vec<Vec<f64>> {
    let cx = &ms.complex;
    let mut out = vec![Vec::new(); cx.n_vertices()];
    for h in 0..cx.n_half_edges() {
        out[cx.origin(h)].push(-inner(&dual.faces[cx.face(h)], &corner_point(ms, f, h)));
    }
    out
}

/// Averages the corner values of each vertex; fails on a non-positive
/// weight or a spread above `tol_delta`.
pub fn vertex_weights(
    ms: &MarkedSurface,
    f: &[MinkVec],
    dual: &DualRealization,
    tol_delta: f64,
) -> Result<VertexWeights> {
    let mut delta = Vec::new();
    let mut spread = Vec::new();
    for (i, vals) in corner_weights(ms, f, dual).into_iter().enumerate() {
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        if mean <= 0.0 || lo <= 0.0 {
            return Err(Error::NegativeWeight { vertex: i, value: lo.min(mean) });
        }
        if hi - lo > tol_delta {
            return Err(Error::InconsistentWeight { vertex: i, spread: hi - lo });
        }
        delta.push(mean);
        spread.push(hi - lo);
    }
    Ok(VertexWeights { delta, spread })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexityReport {
    /// Per half-edge `h`: the smallest margin of the far vertices of the
    /// right face against the support plane of the left face.
    pub margins: Vec<f64>,
    pub min_margin: f64,
    /// Half-edge attaining the minimum.
    pub worst: usize,
}

impl ConvexityReport {
    pub fn is_convex(&self, tol_convex: f64) -> bool {
        self.min_margin >= -tol_convex
    }
}

/// Local convexity of the rescaled surface `f_i / δ_i` across every edge.
/// The margin `-1 - <f†(left), ρ(t_h) ρ(M) f_k / δ_k>` is zero for
/// cocircular neighbours and positive when the edge is strictly Delaunay.
pub fn convexity_check(ms: &MarkedSurface, f: &[MinkVec], dual: &DualRealization, delta: &[f64]) -> ConvexityReport {
    let cx = &ms.complex;
    let margins: Vec<f64> = (0..cx.n_half_edges())
        .map(|h| {
            let left = dual.faces[cx.face(h)];
            let t = ms.transition_matrix(h);
            let g = cx.twin(h);
            let skip = [g, cx.next(g)];
            cx.face_half_edges(cx.face(g))
                .into_iter()
                .filter(|k| !skip.contains(k))
                .map(|k| {
                    let p = t.apply(&corner_point(ms, f, k)) / delta[cx.origin(k)];
                    -1.0 - inner(&left, &p)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let (worst, min_margin) = margins
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (h, m)| if m < acc.1 { (h, m) } else { acc });
    ConvexityReport {
        margins,
        min_margin,
        worst,
    }
}

/// Dual surface of a decomposition with vertex weights `δ`: each face gets
/// the point `f†` with `<f†, f_i> = -δ_i` at its corners, by least squares
/// for faces with more than three vertices.
pub fn polar_dual(ms: &MarkedSurface, f: &[MinkVec], delta: &[f64]) -> Result<DualRealization> {
    let cx = &ms.complex;
    let j = crate::minkowski::gram();
    let mut faces = Vec::with_capacity(cx.n_faces());
    for phi in 0..cx.n_faces() {
        let hs = cx.face_half_edges(phi);
        let mut ata = Matrix3::zeros();
        let mut atb = Vector3::zeros();
        for &h in &hs {
            let row = j * corner_point(ms, f, h);
            ata += row * row.transpose();
            atb += row * -delta[cx.origin(h)];
        }
        let x = ata
            .try_inverse()
            .ok_or_else(|| Error::Domain(format!("face {phi} has collinear vertices")))?
            * atb;
        faces.push(x);
    }
    let mut dual = DualRealization {
        faces,
        edge_vectors: Vec::new(),
        closure: Vec::new(),
    };
    dual.edge_vectors = (0..cx.n_half_edges())
        .map(|h| ms.corner_matrix(h).inverse().apply(&dual_edge_difference(ms, &dual, h)))
        .collect();
    dual.closure = (0..cx.n_vertices())
        .map(|i| cx.outgoing(i).into_iter().map(|h| dual.edge_vectors[h]).sum::<MinkVec>().norm())
        .collect();
    Ok(dual)
}

/// `±‖Δf†‖ / ℓ` per edge, before the positivity check. The sign is that of
/// `Δf†` against `f_i × f_j`, negative where the surface folds the wrong way.
pub fn dual_edge_weights(ms: &MarkedSurface, f: &[MinkVec], dual: &DualRealization, min_length: f64) -> Result<Vec<f64>> {
    let cx = &ms.complex;
    let ls = edge_lengths(ms, f, min_length)?;
    ls.iter()
        .enumerate()
        .map(|(e, l)| {
            let h = cx.edge_half(e);
            let d = ms.corner_matrix(h).inverse().apply(&dual_edge_difference(ms, dual, h));
            let sign = inner(&d, &cross(&f[cx.origin(h)], &far_end(ms, f, h))).signum();
            Ok(sign * dual_edge_length(ms, dual, e)? / l)
        })
        .collect()
}

pub fn canonical_weights_dual(
    ms: &MarkedSurface,
    f: &[MinkVec],
    dual: &DualRealization,
    min_length: f64,
) -> Result<EdgeWeights> {
    EdgeWeights::new(dual_edge_weights(ms, f, dual, min_length)?)
}

/// Interior angle of each triangle at the origin of each half-edge.
#[derive(Clone, Debug, PartialEq)]
pub struct CornerAngles(pub Vec<f64>);

impl CornerAngles {
    pub fn get(&self, h: usize) -> f64 {
        self.0[h]
    }
}

fn require_triangles(ms: &MarkedSurface) -> Result<()> {
    let cx = &ms.complex;
    match (0..cx.n_faces()).find(|&phi| cx.face_half_edges(phi).len() != 3) {
        Some(phi) => Err(Error::Domain(format!("face {phi} is not a triangle"))),
        None => Ok(()),
    }
}

/// Angle opposite `opp` in a hyperbolic triangle with sides `a`, `b`, `opp`.
pub fn law_of_cosines(a: f64, b: f64, opp: f64) -> Result<f64> {
    let cos = (a.cosh() * b.cosh() - opp.cosh()) / (a.sinh() * b.sinh());
    if !(cos.abs() < 1.0) || opp >= a + b || a >= b + opp || b >= a + opp {
        return Err(Error::Triangle(a, b, opp));
    }
    Ok(cos.acos())
}

pub fn corner_angles(ms: &MarkedSurface, f: &[MinkVec], min_length: f64) -> Result<CornerAngles> {
    require_triangles(ms)?;
    let cx = &ms.complex;
    let ls = edge_lengths(ms, f, min_length)?;
    let l = |h: usize| ls[cx.edge(h)];
    (0..cx.n_half_edges())
        .map(|h| law_of_cosines(l(h), l(cx.prev(h)), l(cx.next(h))))
        .collect::<Result<Vec<_>>>()
        .map(CornerAngles)
}

/// Half-angle argument of the cotangent term of `h` in its left triangle.
fn cot_argument(ms: &MarkedSurface, angles: &CornerAngles, h: usize) -> f64 {
    let cx = &ms.complex;
    0.5 * (PI - angles.get(h) - angles.get(cx.next(h)) + angles.get(cx.prev(h)))
}

/// The angle formula for the canonical weights of a Delaunay triangulation
/// with unit vertex weights, before the positivity check.
pub fn cot_edge_weights(
    ms: &MarkedSurface,
    f: &[MinkVec],
    angles: &CornerAngles,
    min_length: f64,
) -> Result<Vec<f64>> {
    require_triangles(ms)?;
    let cx = &ms.complex;
    let ls = edge_lengths(ms, f, min_length)?;
    (0..cx.n_edges())
        .map(|e| {
            let h = cx.edge_half(e);
            let mut sum = 0.0;
            for side in [h, cx.twin(h)] {
                let arg = cot_argument(ms, angles, side);
                if arg <= 1e-12 || arg >= PI - 1e-12 {
                    return Err(Error::CotangentPole { edge: e, argument: arg });
                }
                sum += 1.0 / arg.tan();
            }
            let l = ls[e];
            Ok(sum * (0.5 * l).tanh() / l)
        })
        .collect()
}

pub fn canonical_weights_cot(
    ms: &MarkedSurface,
    f: &[MinkVec],
    angles: &CornerAngles,
    min_length: f64,
) -> Result<EdgeWeights> {
    EdgeWeights::new(cot_edge_weights(ms, f, angles, min_length)?)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Circle {
    Real { center: MinkVec, radius: f64 },
    /// The polar plane misses the hyperboloid.
    Imaginary,
    /// `f†` is not a future time-like vector, so its polar plane cuts out a
    /// curve of constant distance to a geodesic rather than a circle.
    NotTimelike,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircleData {
    pub faces: Vec<Circle>,
    /// Centered at `f_i` in the frame of the vertex.
    pub vertices: Vec<Circle>,
}

/// Face circles cut out by the planes `<f†, x> = -1` and vertex circles of
/// radius `arccosh δ_i`.
pub fn circle_data(f: &[MinkVec], dual: &DualRealization, delta: &[f64]) -> CircleData {
    let faces = dual
        .faces
        .iter()
        .map(|p| {
            let lam2 = -inner(p, p);
            if lam2 <= 0.0 || p[2] <= 0.0 {
                return Circle::NotTimelike;
            }
            let lam = lam2.sqrt();
            if lam > 1.0 {
                return Circle::Imaginary;
            }
            Circle::Real {
                center: p / lam,
                radius: acosh_stable(1.0 / lam),
            }
        })
        .collect();
    let vertices = f
        .iter()
        .zip(delta)
        .map(|(p, &d)| {
            if d < 1.0 {
                Circle::Imaginary
            } else {
                Circle::Real {
                    center: *p,
                    radius: acosh_stable(d),
                }
            }
        })
        .collect();
    CircleData { faces, vertices }
}
