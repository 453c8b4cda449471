//! Half-edge combinatorics of closed oriented cell decompositions, the
//! tree–cotree cut and the group-word labels that stand in for the
//! universal cover.
//!
//! Half-edges are numbered in input order: the sides of face 0, then the
//! sides of face 1, and so on. Faces are counter-clockwise, so `face(h)` is
//! the face on the left of `h`. `rotate(h) = next(twin(h))` is the next
//! outgoing half-edge around `origin(h)`, turning towards the right face.
//!
//! Labels are built on the fundamental domain `D` obtained by gluing all
//! faces along dual-tree edges. Every half-edge `h` carries
//! - a transition `t_h`: crossing `h` from the copy `D` lands in `t_h · D`;
//! - a corner word `M_h`: the corner of `face(h)` at `origin(h)` in `D` is
//!   the vertex representative moved by `M_h`;
//! - an edge label `g_h = M_h^{-1} M_{next(h)}`: the edge runs from the
//!   representative of `origin(h)` to `g_h` applied to the representative
//!   of its target.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::word::Word;

/// One oriented side of a face: `from -> to` along edge `edge`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Side {
    pub from: usize,
    pub to: usize,
    pub edge: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellComplex {
    n_vertices: usize,
    origin: Vec<usize>,
    twin: Vec<usize>,
    next: Vec<usize>,
    prev: Vec<usize>,
    face: Vec<usize>,
    edge: Vec<usize>,
    face_start: Vec<usize>,
    edge_half: Vec<usize>,
    edge_keys: Vec<usize>,
    vertex_out: Vec<usize>,
    genus: usize,
}

/// Builds and validates a complex from face side lists.
///
/// Edge keys are arbitrary; edges are numbered by first appearance.
pub fn load_complex(n_vertices: usize, faces: &[Vec<Side>]) -> Result<CellComplex> {
    let mut origin = Vec::new();
    let mut next = Vec::new();
    let mut prev = Vec::new();
    let mut face = Vec::new();
    let mut face_start = Vec::new();
    let mut ends = Vec::new();
    let mut keys = Vec::new();

    for (f, sides) in faces.iter().enumerate() {
        if sides.is_empty() {
            return Err(Error::NonManifold(format!("face {f} has no sides")));
        }
        let start = origin.len();
        face_start.push(start);
        let n = sides.len();
        for (k, s) in sides.iter().enumerate() {
            if s.from >= n_vertices || s.to >= n_vertices {
                return Err(Error::Domain(format!("face {f}: vertex out of range")));
            }
            let following = sides[(k + 1) % n];
            if s.to != following.from {
                return Err(Error::Orientation(format!(
                    "face {f}: side {k} ends at {} but the next side starts at {}",
                    s.to, following.from
                )));
            }
            origin.push(s.from);
            ends.push(s.to);
            next.push(start + (k + 1) % n);
            prev.push(start + (k + n - 1) % n);
            face.push(f);
            keys.push(s.edge);
        }
    }

    let nh = origin.len();
    let mut by_key: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut edge_keys = Vec::new();
    for (h, &k) in keys.iter().enumerate() {
        let e = by_key.entry(k).or_default();
        if e.is_empty() {
            edge_keys.push(k);
        }
        e.push(h);
    }
    let mut twin = vec![usize::MAX; nh];
    let mut edge = vec![usize::MAX; nh];
    let mut edge_half = Vec::with_capacity(edge_keys.len());
    for (e, k) in edge_keys.iter().enumerate() {
        let hs = &by_key[k];
        if hs.len() != 2 {
            return Err(Error::NonManifold(format!(
                "edge {k} used by {} sides, expected 2",
                hs.len()
            )));
        }
        let (a, b) = (hs[0], hs[1]);
        if origin[a] != ends[b] || ends[a] != origin[b] {
            return Err(Error::Orientation(format!(
                "edge {k}: sides {}-{} and {}-{} are not opposite",
                origin[a], ends[a], origin[b], ends[b]
            )));
        }
        twin[a] = b;
        twin[b] = a;
        edge[a] = e;
        edge[b] = e;
        edge_half.push(a);
    }

    let mut vertex_out = vec![usize::MAX; n_vertices];
    for h in (0..nh).rev() {
        vertex_out[origin[h]] = h;
    }
    if let Some(v) = vertex_out.iter().position(|&h| h == usize::MAX) {
        return Err(Error::NonManifold(format!("vertex {v} has no incident edge")));
    }

    let mut cx = CellComplex {
        n_vertices,
        origin,
        twin,
        next,
        prev,
        face,
        edge,
        face_start,
        edge_half,
        edge_keys,
        vertex_out,
        genus: 0,
    };

    // Each vertex link must be a single cycle.
    let mut seen = vec![false; nh];
    for v in 0..n_vertices {
        for h in cx.outgoing(v) {
            seen[h] = true;
        }
    }
    if let Some(h) = seen.iter().position(|s| !s) {
        return Err(Error::NonManifold(format!(
            "vertex {} has a disconnected link",
            cx.origin[h]
        )));
    }

    if !cx.is_connected() {
        return Err(Error::NonManifold("complex is not connected".into()));
    }

    let chi = cx.euler_characteristic();
    if chi % 2 != 0 {
        return Err(Error::Orientation(format!("odd Euler characteristic {chi}")));
    }
    let g = (2 - chi) / 2;
    if g < 2 {
        return Err(Error::Genus(g));
    }
    cx.genus = g as usize;
    Ok(cx)
}

impl CellComplex {
    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }
    pub fn n_edges(&self) -> usize {
        self.edge_half.len()
    }
    pub fn n_faces(&self) -> usize {
        self.face_start.len()
    }
    pub fn n_half_edges(&self) -> usize {
        self.origin.len()
    }
    pub fn genus(&self) -> usize {
        self.genus
    }
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices as i64 - self.n_edges() as i64 + self.n_faces() as i64
    }
    pub fn origin(&self, h: usize) -> usize {
        self.origin[h]
    }
    pub fn target(&self, h: usize) -> usize {
        self.origin[self.next[h]]
    }
    pub fn twin(&self, h: usize) -> usize {
        self.twin[h]
    }
    pub fn next(&self, h: usize) -> usize {
        self.next[h]
    }
    pub fn prev(&self, h: usize) -> usize {
        self.prev[h]
    }
    pub fn face(&self, h: usize) -> usize {
        self.face[h]
    }
    pub fn edge(&self, h: usize) -> usize {
        self.edge[h]
    }
    /// Canonical half-edge of an edge: its first side in input order.
    pub fn edge_half(&self, e: usize) -> usize {
        self.edge_half[e]
    }
    /// The key the edge carried in the input.
    pub fn edge_key(&self, e: usize) -> usize {
        self.edge_keys[e]
    }
    pub fn is_canonical(&self, h: usize) -> bool {
        self.edge_half[self.edge[h]] == h
    }
    pub fn rotate(&self, h: usize) -> usize {
        self.next[self.twin[h]]
    }

    /// Outgoing half-edges of `v` in rotation order, starting at the one with
    /// the smallest index.
    pub fn outgoing(&self, v: usize) -> Vec<usize> {
        self.rotation_from(self.vertex_out[v])
    }

    /// The rotation cycle starting at `h`.
    pub fn rotation_from(&self, h: usize) -> Vec<usize> {
        let mut out = vec![h];
        let mut c = self.rotate(h);
        while c != h {
            out.push(c);
            c = self.rotate(c);
        }
        out
    }

    /// Half-edges of face `f` in boundary order.
    pub fn face_half_edges(&self, f: usize) -> Vec<usize> {
        let s = self.face_start[f];
        let mut out = vec![s];
        let mut c = self.next[s];
        while c != s {
            out.push(c);
            c = self.next[c];
        }
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.outgoing(v).len()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n_vertices];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for h in self.outgoing(v) {
                let w = self.target(h);
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// The dual complex: faces become vertices and vertices become faces.
    /// Half-edge `h` of the dual crosses `h` from `face(h)` to
    /// `face(twin(h))`; dual faces run around primal vertices.
    pub fn dual(&self) -> CellComplex {
        let nh = self.n_half_edges();
        let next: Vec<usize> = (0..nh).map(|h| self.rotate(h)).collect();
        let mut prev = vec![0; nh];
        for h in 0..nh {
            prev[next[h]] = h;
        }
        let mut vertex_out = vec![usize::MAX; self.n_faces()];
        for h in (0..nh).rev() {
            vertex_out[self.face[h]] = h;
        }
        let face_start = self.vertex_out.clone();
        let mut face = vec![0; nh];
        for (v, &s) in face_start.iter().enumerate() {
            let mut c = s;
            loop {
                face[c] = v;
                c = next[c];
                if c == s {
                    break;
                }
            }
        }
        CellComplex {
            n_vertices: self.n_faces(),
            origin: self.face.clone(),
            twin: self.twin.clone(),
            next,
            prev,
            face,
            edge: self.edge.clone(),
            face_start,
            edge_half: self.edge_half.clone(),
            edge_keys: self.edge_keys.clone(),
            vertex_out,
            genus: self.genus,
        }
    }
}

/// Tree–cotree partition of the edges.
#[derive(Clone, Debug, PartialEq)]
pub struct HomologyBasis {
    pub base_vertex: usize,
    pub base_face: usize,
    /// Edges of the primal spanning tree.
    pub tree: Vec<bool>,
    /// Edges of the dual spanning tree.
    pub cotree: Vec<bool>,
    /// Leftover edges in increasing order; leftover `r` defines `x_{r+1}`.
    pub leftover: Vec<usize>,
    /// Generator index of each leftover edge.
    pub generator_of_edge: Vec<Option<usize>>,
    /// Vertices in BFS order.
    pub vertex_order: Vec<usize>,
    /// Tree half-edge from the parent into each vertex (`None` at the root).
    pub parent_half: Vec<Option<usize>>,
    /// Faces in dual BFS order.
    pub face_order: Vec<usize>,
    /// Cotree half-edge crossed to reach each face, oriented so that its
    /// left face is the parent (`None` at the base face).
    pub face_parent_half: Vec<Option<usize>>,
}

impl HomologyBasis {
    pub fn n_generators(&self) -> usize {
        self.leftover.len()
    }
}

/// BFS spanning tree from `base_vertex`, then a dual spanning tree grown
/// from `base_face` avoiding tree edges; the remaining `2g` edges are generators.
pub fn tree_cotree(cx: &CellComplex, base_vertex: usize, base_face: usize) -> Result<HomologyBasis> {
    if base_vertex >= cx.n_vertices() || base_face >= cx.n_faces() {
        return Err(Error::Domain("base vertex or face out of range".into()));
    }
    let ne = cx.n_edges();
    let mut tree = vec![false; ne];
    let mut parent_half = vec![None; cx.n_vertices()];
    let mut seen = vec![false; cx.n_vertices()];
    let mut vertex_order = Vec::new();
    let mut queue = VecDeque::from([base_vertex]);
    seen[base_vertex] = true;
    while let Some(v) = queue.pop_front() {
        vertex_order.push(v);
        let mut out = cx.outgoing(v);
        out.sort_unstable();
        for h in out {
            let w = cx.target(h);
            if !seen[w] {
                seen[w] = true;
                tree[cx.edge(h)] = true;
                parent_half[w] = Some(h);
                queue.push_back(w);
            }
        }
    }

    // Prim's algorithm on the dual graph, taking the frontier edge with the
    // largest input key first. Edges with small keys are thus the last to
    // be absorbed, so a mesh can choose its generator edges by numbering.
    let mut cotree = vec![false; ne];
    let mut face_parent_half = vec![None; cx.n_faces()];
    let mut seen = vec![false; cx.n_faces()];
    let mut face_order = Vec::new();
    let mut frontier = BinaryHeap::new();
    let enter = |f: usize, seen: &mut [bool], order: &mut Vec<usize>, frontier: &mut BinaryHeap<(usize, Reverse<usize>)>| {
        seen[f] = true;
        order.push(f);
        for h in cx.face_half_edges(f) {
            if !tree[cx.edge(h)] {
                frontier.push((cx.edge_key(cx.edge(h)), Reverse(h)));
            }
        }
    };
    enter(base_face, &mut seen, &mut face_order, &mut frontier);
    while let Some((_, Reverse(h))) = frontier.pop() {
        let g = cx.face(cx.twin(h));
        if seen[g] {
            continue;
        }
        cotree[cx.edge(h)] = true;
        face_parent_half[g] = Some(h);
        enter(g, &mut seen, &mut face_order, &mut frontier);
    }

    let leftover: Vec<usize> = (0..ne).filter(|&e| !tree[e] && !cotree[e]).collect();
    if leftover.len() != 2 * cx.genus() {
        return Err(Error::Rank(format!(
            "tree-cotree left {} edges, expected {}",
            leftover.len(),
            2 * cx.genus()
        )));
    }
    let mut generator_of_edge = vec![None; ne];
    for (r, &e) in leftover.iter().enumerate() {
        generator_of_edge[e] = Some(r);
    }
    Ok(HomologyBasis {
        base_vertex,
        base_face,
        tree,
        cotree,
        leftover,
        generator_of_edge,
        vertex_order,
        parent_half,
        face_order,
        face_parent_half,
    })
}

/// Per-half-edge words; see the module documentation.
#[derive(Clone, Debug, PartialEq)]
pub struct HolonomyLabels {
    pub transition: Vec<Word>,
    pub corner: Vec<Word>,
    pub label: Vec<Word>,
    pub relator: Word,
    pub n_generators: usize,
}

/// Computes transitions, corner words, edge labels and the relator.
pub fn assign_labels(cx: &CellComplex, basis: &HomologyBasis) -> HolonomyLabels {
    let nh = cx.n_half_edges();
    let mut known = vec![false; nh];
    let mut t = vec![Word::identity(); nh];
    for h in 0..nh {
        let e = cx.edge(h);
        if basis.cotree[e] {
            known[h] = true;
        } else if let Some(r) = basis.generator_of_edge[e] {
            t[h] = Word::generator(r, !cx.is_canonical(h));
            known[h] = true;
        }
    }

    let product = |t: &[Word], hs: &[usize]| {
        hs.iter()
            .fold(Word::identity(), |acc, &h| acc.concat(&t[h]))
    };

    // Leaf-first elimination of the vertex relations.
    for &v in basis.vertex_order.iter().rev() {
        let Some(hin) = basis.parent_half[v] else { continue };
        let hp = cx.twin(hin);
        let cycle = cx.rotation_from(hp);
        debug_assert!(cycle[1..].iter().all(|&h| known[h]));
        let rest = product(&t, &cycle[1..]);
        t[hp] = rest.inverse();
        t[hin] = rest;
        known[hp] = true;
        known[hin] = true;
    }

    let root_cycle = cx.outgoing(basis.base_vertex);
    let relator = product(&t, &root_cycle).cyclically_reduced();
    for w in t.iter_mut() {
        *w = w.dehn_reduce(&relator);
    }

    let mut m = vec![Word::identity(); nh];
    let propagate = |m: &mut Vec<Word>, start: usize| {
        let cycle = cx.rotation_from(start);
        for w in cycle.windows(2) {
            m[w[1]] = t[w[0]].inverse().concat(&m[w[0]]).dehn_reduce(&relator);
        }
    };
    propagate(&mut m, root_cycle[0]);
    for &v in &basis.vertex_order {
        let Some(hc) = basis.parent_half[v] else { continue };
        let start = cx.next(hc);
        m[start] = m[hc].clone();
        propagate(&mut m, start);
    }

    let mut label = vec![Word::identity(); nh];
    for e in 0..cx.n_edges() {
        let h = cx.edge_half(e);
        let g = m[h].inverse().concat(&m[cx.next(h)]).dehn_reduce(&relator);
        label[cx.twin(h)] = g.inverse();
        label[h] = g;
    }

    HolonomyLabels {
        transition: t,
        corner: m,
        label,
        relator,
        n_generators: basis.n_generators(),
    }
}

/// The relation read around the base vertex, cyclically reduced.
pub fn relator_word(cx: &CellComplex, basis: &HomologyBasis) -> Word {
    assign_labels(cx, basis).relator
}

/// Counter-clockwise boundary of the fundamental domain: the half-edges of
/// non-cotree edges, each followed by the next boundary side.
pub fn domain_boundary(cx: &CellComplex, basis: &HomologyBasis) -> Vec<usize> {
    let start = (0..cx.n_half_edges())
        .find(|&h| !basis.cotree[cx.edge(h)])
        .expect("a closed surface of genus >= 2 has non-cotree edges");
    let step = |h: usize| {
        let mut c = cx.next(h);
        while basis.cotree[cx.edge(c)] {
            c = cx.next(cx.twin(c));
        }
        c
    };
    let mut out = vec![start];
    let mut c = step(start);
    while c != start {
        out.push(c);
        c = step(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn sides(spec: &[(usize, usize, usize)]) -> Vec<Side> {
        spec.iter()
            .map(|&(from, to, edge)| Side { from, to, edge })
            .collect()
    }

    #[test]
    fn octagon_with_center_has_genus_two() {
        let cx = fixtures::octagon_with_center();
        assert_eq!((cx.n_vertices(), cx.n_edges(), cx.n_faces()), (2, 12, 8));
        assert_eq!(cx.genus(), 2);
    }

    #[test]
    fn torus_is_rejected() {
        // square torus a b A B with one vertex
        let f = sides(&[(0, 0, 0), (0, 0, 1), (0, 0, 0), (0, 0, 1)]);
        assert_eq!(load_complex(1, &[f]), Err(Error::Genus(1)));
    }

    #[test]
    fn tetrahedron_is_rejected() {
        let faces = vec![
            sides(&[(0, 1, 0), (1, 2, 1), (2, 0, 2)]),
            sides(&[(1, 0, 0), (0, 3, 3), (3, 1, 4)]),
            sides(&[(2, 1, 1), (1, 3, 4), (3, 2, 5)]),
            sides(&[(0, 2, 2), (2, 3, 5), (3, 0, 3)]),
        ];
        assert_eq!(load_complex(4, &faces), Err(Error::Genus(0)));
    }

    #[test]
    fn bad_inputs() {
        let f = sides(&[(0, 0, 0), (0, 0, 1), (0, 0, 0)]);
        assert!(matches!(load_complex(1, &[f]), Err(Error::NonManifold(_))));
        let f = sides(&[(0, 1, 0), (1, 0, 1)]);
        assert!(matches!(load_complex(2, &[f.clone(), f]), Err(Error::Orientation(_))));
        let f = sides(&[(0, 1, 0), (0, 1, 1)]);
        assert!(matches!(load_complex(2, &[f]), Err(Error::Orientation(_))));
    }

    #[test]
    fn tree_cotree_counts() {
        for cx in fixtures::all_complexes() {
            let b = tree_cotree(&cx, 0, 0).unwrap();
            let t = b.tree.iter().filter(|&&x| x).count();
            let c = b.cotree.iter().filter(|&&x| x).count();
            assert_eq!(t, cx.n_vertices() - 1);
            assert_eq!(c, cx.n_faces() - 1);
            assert_eq!(b.leftover.len(), 2 * cx.genus());
            assert_eq!(t + c + b.leftover.len(), cx.n_edges());
        }
    }

    #[test]
    fn labels_invert_on_twins_and_vanish_on_tree() {
        for cx in fixtures::all_complexes() {
            let b = tree_cotree(&cx, 0, 0).unwrap();
            let l = assign_labels(&cx, &b);
            for h in 0..cx.n_half_edges() {
                let tw = cx.twin(h);
                assert!(l.label[h].concat(&l.label[tw]).is_empty());
                assert!(l.transition[h].concat(&l.transition[tw]).is_empty());
                if b.tree[cx.edge(h)] {
                    assert!(l.label[h].is_empty());
                }
            }
            let ab = l.relator.abelianization(l.n_generators);
            assert!(ab.iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn standard_octagon_relator_is_product_of_commutators() {
        let cx = fixtures::standard_octagon();
        let b = tree_cotree(&cx, 0, 0).unwrap();
        let r = relator_word(&cx, &b);
        assert_eq!(r.len(), 8);
        assert_eq!(r.to_string(), "x1 X2 X1 x2 x3 X4 X3 x4");
    }

    #[test]
    fn dual_of_dual_is_original() {
        for cx in fixtures::all_complexes() {
            let d = cx.dual();
            assert_eq!(d.n_vertices(), cx.n_faces());
            assert_eq!(d.n_faces(), cx.n_vertices());
            assert_eq!(d.genus(), cx.genus());
            let dd = d.dual();
            for h in 0..cx.n_half_edges() {
                assert_eq!(dd.next(h), cx.next(h));
                assert_eq!(dd.origin(h), cx.origin(h));
                assert_eq!(dd.face(h), cx.face(h));
            }
        }
    }

    #[test]
    fn boundary_has_expected_length() {
        for cx in fixtures::all_complexes() {
            let b = tree_cotree(&cx, 0, 0).unwrap();
            let bd = domain_boundary(&cx, &b);
            assert_eq!(bd.len(), 2 * (cx.n_vertices() - 1) + 4 * cx.genus());
        }
    }
}
