//! Built-in genus-2 complexes used by tests, benchmarks and the CLI.
//!
//! All three are cut from the octagon with the side gluing `a b A B c d C D`,
//! so every octagon corner becomes a single vertex (vertex 0).

use crate::complex::{load_complex, CellComplex, Side};
use crate::energy::EnergyVariant;
use crate::harmonic::{default_start, solve_harmonic, EdgeWeights, SolverOptions};
use crate::minkowski::MinkVec;
use crate::surface::MarkedSurface;
use crate::teich_opt::{optimize_metric, OuterOptions};

/// Edge key of octagon side `k` under the gluing `a b A B c d C D`.
fn rim_key(k: usize) -> usize {
    [0, 1, 0, 1, 2, 3, 2, 3][k]
}

fn side(from: usize, to: usize, edge: usize) -> Side {
    Side { from, to, edge }
}

/// The octagon as a single face with one vertex and four edges.
pub fn standard_octagon() -> CellComplex {
    let face: Vec<Side> = (0..8).map(|k| side(0, 0, rim_key(k))).collect();
    load_complex(1, &[face]).expect("standard octagon is a valid genus-2 complex")
}

/// The octagon coned off from an interior center (vertex 1): eight
/// triangles, eight spokes, four rim edges.
pub fn octagon_with_center() -> CellComplex {
    let spoke = |k: usize| 10 + k % 8;
    let faces: Vec<Vec<Side>> = (0..8)
        .map(|k| vec![side(1, 0, spoke(k)), side(0, 0, rim_key(k)), side(0, 1, spoke(k + 1))])
        .collect();
    load_complex(2, &faces).expect("octagon with center is a valid genus-2 complex")
}

/// Fan triangulation of the octagon from corner 0: one vertex, nine edges,
/// six triangles.
pub fn one_vertex_triangulation() -> CellComplex {
    let diag = |m: usize| 10 + m;
    let mut faces = Vec::new();
    for m in 1..=6 {
        let a = if m == 1 { rim_key(0) } else { diag(m) };
        let c = if m == 6 { rim_key(7) } else { diag(m + 1) };
        faces.push(vec![side(0, 0, a), side(0, 0, rim_key(m)), side(0, 0, c)]);
    }
    load_complex(1, &faces).expect("fan triangulation is a valid genus-2 complex")
}

pub fn all_complexes() -> Vec<CellComplex> {
    vec![standard_octagon(), octagon_with_center(), one_vertex_triangulation()]
}

/// A decomposition with its vertex weights, Delaunay for those weights.
#[derive(Clone, Debug)]
pub struct DelaunayFixture {
    pub surface: MarkedSurface,
    pub positions: Vec<MinkVec>,
    pub delta: Vec<f64>,
}

/// The regular octagon with its center, center weight `0.8`. With unit
/// weights every rim edge would be cocircular; the smaller center circle
/// makes each triangle strictly Delaunay.
pub fn delaunay_octagon() -> DelaunayFixture {
    let surface = MarkedSurface::regular(octagon_with_center()).expect("regular structure");
    let c = EdgeWeights::uniform(surface.complex.n_edges(), 1.0);
    let start = default_start(&surface, &c, 1e-8);
    let sol = solve_harmonic(&surface, &c, &EnergyVariant::Quadratic, &start, &SolverOptions::default())
        .expect("symmetric harmonic map");
    DelaunayFixture {
        surface,
        positions: sol.positions,
        delta: vec![1.0, 0.8],
    }
}

/// The fan triangulation at its optimal structure for unit weights. A
/// single vertex carries a single weight, so the decomposition is Delaunay
/// with unit weights.
pub fn delaunay_fan() -> DelaunayFixture {
    let surface = MarkedSurface::regular(one_vertex_triangulation()).expect("regular structure");
    let c = EdgeWeights::uniform(surface.complex.n_edges(), 1.0);
    let start = default_start(&surface, &c, 1e-8);
    let st = optimize_metric(surface, &c, &EnergyVariant::Quadratic, &start, &OuterOptions::default())
        .expect("fan optimum");
    DelaunayFixture {
        surface: st.surface,
        positions: st.inner.positions,
        delta: vec![1.0],
    }
}
