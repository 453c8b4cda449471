//! Line-oriented text formats for meshes, holonomy representations, solver
//! states and run configurations.
//!
//! Floats are written with `{:e}`, which round-trips exactly. A `#` starts
//! a comment unless it sits between two digits, where it tags the edge of
//! a side (`0-1#12`).

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use nalgebra::Matrix3;

use crate::complex::{load_complex, CellComplex, Side};
use crate::energy::{EnergyVariant, MonotoneTable};
use crate::error::{Error, Result};
use crate::fuchsian::HolonomyRep;
use crate::harmonic::EdgeWeights;
use crate::minkowski::{Isometry, MinkVec};
use crate::surface::MarkedSurface;
use crate::tol::Tolerances;
use crate::word::Word;

type Lines<'a> = [(usize, &'a str)];

fn strip_comment(line: &str) -> &str {
    let b = line.as_bytes();
    for i in 0..b.len() {
        if b[i] == b'#' {
            let tag = i > 0 && b[i - 1].is_ascii_digit() && b.get(i + 1).is_some_and(|c| c.is_ascii_digit());
            if !tag {
                return &line[..i];
            }
        }
    }
    line
}

/// Non-blank lines with comments removed, numbered from 1.
fn content_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, strip_comment(l).trim_end()))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect()
}

/// Whitespace-separated tokens with 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn number<T: std::str::FromStr>(line: usize, col: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::parse(line, col, format!("expected {what}, found {tok:?}")))
}

fn expect_header(lines: &Lines, header: &str, end_line: usize) -> Result<()> {
    match lines.first() {
        Some((no, l)) if l.trim() == header => {
            let _ = no;
            Ok(())
        }
        Some((no, l)) => Err(Error::parse(*no, 1, format!("expected header {header:?}, found {:?}", l.trim()))),
        None => Err(Error::parse(end_line, 1, format!("missing header {header:?}"))),
    }
}

pub fn parse_mesh(text: &str) -> Result<CellComplex> {
    parse_mesh_lines(&content_lines(text), text.lines().count().max(1))
}

fn parse_mesh_lines(lines: &Lines, end_line: usize) -> Result<CellComplex> {
    expect_header(lines, "surface-complex v1", end_line)?;
    let mut vertex_index: HashMap<usize, usize> = HashMap::new();
    let mut face_ids = HashSet::new();
    // per face: its line and sides as (from, to, edge, column)
    let mut faces: Vec<(usize, Vec<(usize, usize, usize, usize)>)> = Vec::new();
    for &(no, line) in &lines[1..] {
        let toks = tokens(line);
        let (col, key) = toks[0];
        match key {
            "vertex" => {
                if toks.len() != 2 {
                    return Err(Error::parse(no, col, "expected `vertex <id>`"));
                }
                let id: usize = number(no, toks[1].0, toks[1].1, "a vertex id")?;
                let next = vertex_index.len();
                if vertex_index.insert(id, next).is_some() {
                    return Err(Error::parse(no, toks[1].0, format!("duplicate vertex id {id}")));
                }
            }
            "face" => {
                let colon = line
                    .find(':')
                    .ok_or_else(|| Error::parse(no, col, "expected `face <id> : <sides>`"))?;
                let head = tokens(&line[..colon]);
                if head.len() != 2 {
                    return Err(Error::parse(no, col, "expected `face <id> : <sides>`"));
                }
                let id: usize = number(no, head[1].0, head[1].1, "a face id")?;
                if !face_ids.insert(id) {
                    return Err(Error::parse(no, head[1].0, format!("duplicate face id {id}")));
                }
                let mut sides = Vec::new();
                let mut offset = colon + 1;
                for piece in line[colon + 1..].split(',') {
                    let lead = piece.len() - piece.trim_start().len();
                    let c = offset + lead + 1;
                    sides.push(parse_side(no, c, piece.trim())?);
                    offset += piece.len() + 1;
                }
                faces.push((no, sides));
            }
            other => return Err(Error::parse(no, col, format!("unknown keyword {other:?}"))),
        }
    }
    if faces.is_empty() {
        return Err(Error::parse(end_line, 1, "mesh has no faces"));
    }
    let mut sides_out = Vec::with_capacity(faces.len());
    for (no, sides) in &faces {
        let mut out = Vec::with_capacity(sides.len());
        for (k, &(from, to, edge, c)) in sides.iter().enumerate() {
            let look = |v: usize| {
                vertex_index
                    .get(&v)
                    .copied()
                    .ok_or_else(|| Error::parse(*no, c, format!("undeclared vertex {v}")))
            };
            let (next_from, _, _, _) = sides[(k + 1) % sides.len()];
            if to != next_from {
                return Err(Error::parse(
                    *no,
                    c,
                    format!("side ends at vertex {to} but the next side starts at {next_from}"),
                ));
            }
            out.push(Side {
                from: look(from)?,
                to: look(to)?,
                edge,
            });
        }
        sides_out.push(out);
    }
    load_complex(vertex_index.len(), &sides_out)
}

/// `<from>-<to>#<edge>`.
fn parse_side(no: usize, col: usize, spec: &str) -> Result<(usize, usize, usize, usize)> {
    let bad = || Error::parse(no, col, format!("expected `<vertex>-<vertex>#<edge>`, found {spec:?}"));
    let (ends, edge) = spec.split_once('#').ok_or_else(bad)?;
    let (a, b) = ends.split_once('-').ok_or_else(bad)?;
    let n = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    Ok((n(a)?, n(b)?, n(edge)?, col))
}

/// Sides are written with vertex indices as ids and edge keys as edge ids.
pub fn write_mesh(cx: &CellComplex) -> String {
    let mut s = String::from("surface-complex v1\n");
    for v in 0..cx.n_vertices() {
        let _ = writeln!(s, "vertex {v}");
    }
    for f in 0..cx.n_faces() {
        let sides: Vec<String> = cx
            .face_half_edges(f)
            .into_iter()
            .map(|h| format!("{}-{}#{}", cx.origin(h), cx.target(h), cx.edge_key(cx.edge(h))))
            .collect();
        let _ = writeln!(s, "face {f} : {}", sides.join(", "));
    }
    s
}

pub fn parse_rep(text: &str, tol: &Tolerances) -> Result<HolonomyRep> {
    parse_rep_lines(&content_lines(text), text.lines().count().max(1), tol)
}

fn parse_rep_lines(lines: &Lines, end_line: usize, tol: &Tolerances) -> Result<HolonomyRep> {
    expect_header(lines, "holonomy v1", end_line)?;
    let mut gens: Vec<(usize, Matrix3<f64>)> = Vec::new();
    let mut relator: Option<(usize, Word)> = None;
    let mut k = 1;
    while k < lines.len() {
        let (no, line) = lines[k];
        let toks = tokens(line);
        match toks[0].1 {
            "gen" => {
                if toks.len() != 2 {
                    return Err(Error::parse(no, toks[0].0, "expected `gen <k>`"));
                }
                let idx: usize = number(no, toks[1].0, toks[1].1, "a generator index")?;
                if idx != gens.len() + 1 {
                    return Err(Error::parse(no, toks[1].0, format!("expected generator {}", gens.len() + 1)));
                }
                let mut m = Matrix3::zeros();
                for r in 0..3 {
                    let Some(&(rno, row)) = lines.get(k + 1 + r) else {
                        return Err(Error::parse(end_line, 1, format!("generator {idx} has fewer than 3 rows")));
                    };
                    let vals = tokens(row);
                    if vals.len() != 3 {
                        return Err(Error::parse(rno, 1, "expected 3 numbers"));
                    }
                    for (c, (col, tok)) in vals.into_iter().enumerate() {
                        m[(r, c)] = number(rno, col, tok, "a number")?;
                    }
                }
                gens.push((no, m));
                k += 4;
            }
            "relator" => {
                if relator.is_some() {
                    return Err(Error::parse(no, toks[0].0, "second relator line"));
                }
                let rest = line.trim_start()["relator".len()..].trim();
                let w: Word = rest
                    .parse()
                    .map_err(|e: Error| Error::parse(no, toks[0].0, format!("relator: {e}")))?;
                relator = Some((no, w));
                k += 1;
            }
            other => return Err(Error::parse(no, toks[0].0, format!("unknown keyword {other:?}"))),
        }
    }
    let (rno, relator) = relator.ok_or_else(|| Error::parse(end_line, 1, "missing relator line"))?;
    if gens.is_empty() {
        return Err(Error::parse(end_line, 1, "no generators"));
    }
    if relator.max_generator() > gens.len() {
        return Err(Error::parse(rno, 1, "relator uses an undefined generator"));
    }
    let mut isos = Vec::with_capacity(gens.len());
    for (i, (no, m)) in gens.into_iter().enumerate() {
        let g = Isometry::from_matrix(m, tol.iso)
            .map_err(|e| Error::parse(no, 1, format!("generator {}: {e}", i + 1)))?;
        isos.push(g);
    }
    let rep = HolonomyRep::from_parts_unchecked(isos, relator);
    let r = rep.relator_residual();
    if r > tol.rel {
        return Err(Error::parse(rno, 1, format!("relator residual {r:e} exceeds {:e}", tol.rel)));
    }
    Ok(rep)
}

pub fn write_rep(rep: &HolonomyRep) -> String {
    let mut s = String::from("holonomy v1\n");
    for (k, g) in rep.generators().iter().enumerate() {
        let _ = writeln!(s, "gen {}", k + 1);
        let m = g.matrix();
        for r in 0..3 {
            let _ = writeln!(s, "{:e} {:e} {:e}", m[(r, 0)], m[(r, 1)], m[(r, 2)]);
        }
    }
    let _ = writeln!(s, "relator {}", rep.relator());
    s
}

/// Everything needed to resume or render a run.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub complex: CellComplex,
    pub base_vertex: usize,
    pub base_face: usize,
    pub rep: HolonomyRep,
    pub variant: EnergyVariant,
    pub positions: Vec<MinkVec>,
    pub weights: EdgeWeights,
    /// Vertex weights, when the state was certified.
    pub delta: Option<Vec<f64>>,
}

impl SolverState {
    pub fn from_surface(
        ms: &MarkedSurface,
        variant: &EnergyVariant,
        positions: &[MinkVec],
        weights: &EdgeWeights,
        delta: Option<Vec<f64>>,
    ) -> Self {
        SolverState {
            complex: ms.complex.clone(),
            base_vertex: ms.basis.base_vertex,
            base_face: ms.basis.base_face,
            rep: ms.rep.clone(),
            variant: variant.clone(),
            positions: positions.to_vec(),
            weights: weights.clone(),
            delta,
        }
    }

    /// Rebuilds the cut from the stored base and attaches the stored
    /// representation.
    pub fn surface(&self) -> Result<MarkedSurface> {
        let basis = crate::complex::tree_cotree(&self.complex, self.base_vertex, self.base_face)?;
        let labels = crate::complex::assign_labels(&self.complex, &basis);
        MarkedSurface::new(self.complex.clone(), basis, labels, self.rep.clone())
    }
}

pub fn write_state(st: &SolverState) -> String {
    let mut s = String::from("state v1\n");
    let _ = writeln!(s, "base {} {}", st.base_vertex, st.base_face);
    let _ = writeln!(s, "variant {}", st.variant.name());
    if let EnergyVariant::Custom(t) = &st.variant {
        for (x, w, dw) in t.samples() {
            let _ = writeln!(s, "sample {x:e} {w:e} {dw:e}");
        }
    }
    s.push_str("begin mesh\n");
    s.push_str(&write_mesh(&st.complex));
    s.push_str("end mesh\nbegin holonomy\n");
    s.push_str(&write_rep(&st.rep));
    s.push_str("end holonomy\n");
    for (i, p) in st.positions.iter().enumerate() {
        let _ = writeln!(s, "pos {i} {:e} {:e} {:e}", p[0], p[1], p[2]);
    }
    for e in 0..st.complex.n_edges() {
        let _ = writeln!(s, "weight {} {:e}", st.complex.edge_key(e), st.weights.get(e));
    }
    if let Some(d) = &st.delta {
        for (i, x) in d.iter().enumerate() {
            let _ = writeln!(s, "delta {i} {x:e}");
        }
    }
    s
}

/// Lines strictly between `begin <name>` at `lines[k]` and `end <name>`.
fn block<'a>(lines: &Lines<'a>, k: usize, name: &str) -> Result<(Vec<(usize, &'a str)>, usize)> {
    let end = format!("end {name}");
    let stop = lines[k + 1..]
        .iter()
        .position(|(_, l)| l.trim() == end)
        .ok_or_else(|| Error::parse(lines[k].0, 1, format!("unterminated block {name:?}")))?;
    Ok((lines[k + 1..k + 1 + stop].to_vec(), k + stop + 2))
}

pub fn parse_state(text: &str, tol: &Tolerances) -> Result<SolverState> {
    let lines = content_lines(text);
    let end_line = text.lines().count().max(1);
    expect_header(&lines, "state v1", end_line)?;
    let mut base = None;
    let mut variant_name: Option<(usize, String)> = None;
    let mut samples = (Vec::new(), Vec::new(), Vec::new());
    let mut complex = None;
    let mut rep = None;
    let mut pos: Vec<(usize, usize, MinkVec)> = Vec::new();
    let mut weights: Vec<(usize, usize, f64)> = Vec::new();
    let mut delta: Vec<(usize, usize, f64)> = Vec::new();
    let mut k = 1;
    while k < lines.len() {
        let (no, line) = lines[k];
        let toks = tokens(line);
        let nums = |n: usize| -> Result<Vec<f64>> {
            if toks.len() != n + 1 {
                return Err(Error::parse(no, 1, format!("expected {n} values after {:?}", toks[0].1)));
            }
            toks[1..].iter().map(|(c, t)| number(no, *c, t, "a number")).collect()
        };
        match toks[0].1 {
            "base" => {
                let v = nums(2)?;
                base = Some((v[0] as usize, v[1] as usize));
            }
            "variant" => {
                if toks.len() != 2 {
                    return Err(Error::parse(no, 1, "expected `variant <name>`"));
                }
                variant_name = Some((no, toks[1].1.to_string()));
            }
            "sample" => {
                let v = nums(3)?;
                samples.0.push(v[0]);
                samples.1.push(v[1]);
                samples.2.push(v[2]);
            }
            "begin" if toks.len() == 2 && toks[1].1 == "mesh" => {
                let (inner, next) = block(&lines, k, "mesh")?;
                complex = Some(parse_mesh_lines(&inner, no)?);
                k = next;
                continue;
            }
            "begin" if toks.len() == 2 && toks[1].1 == "holonomy" => {
                let (inner, next) = block(&lines, k, "holonomy")?;
                rep = Some(parse_rep_lines(&inner, no, tol)?);
                k = next;
                continue;
            }
            "pos" => {
                let v = nums(4)?;
                pos.push((no, v[0] as usize, MinkVec::new(v[1], v[2], v[3])));
            }
            "weight" => {
                let v = nums(2)?;
                weights.push((no, v[0] as usize, v[1]));
            }
            "delta" => {
                let v = nums(2)?;
                delta.push((no, v[0] as usize, v[1]));
            }
            other => return Err(Error::parse(no, toks[0].0, format!("unknown keyword {other:?}"))),
        }
        k += 1;
    }
    let complex = complex.ok_or_else(|| Error::parse(end_line, 1, "missing mesh block"))?;
    let rep = rep.ok_or_else(|| Error::parse(end_line, 1, "missing holonomy block"))?;
    let (base_vertex, base_face) = base.ok_or_else(|| Error::parse(end_line, 1, "missing base line"))?;
    let variant = match variant_name {
        None => EnergyVariant::Quadratic,
        Some((no, name)) => variant_from_name(&name, samples).map_err(|e| Error::parse(no, 1, e.to_string()))?,
    };
    let nv = complex.n_vertices();
    let positions = indexed(pos, nv, "pos", end_line)?;
    let key_to_edge: HashMap<usize, usize> = (0..complex.n_edges()).map(|e| (complex.edge_key(e), e)).collect();
    let mut c = vec![f64::NAN; complex.n_edges()];
    for (no, key, w) in weights {
        let e = *key_to_edge
            .get(&key)
            .ok_or_else(|| Error::parse(no, 1, format!("unknown edge id {key}")))?;
        c[e] = w;
    }
    if let Some(e) = c.iter().position(|w| w.is_nan()) {
        return Err(Error::parse(end_line, 1, format!("missing weight for edge {}", complex.edge_key(e))));
    }
    let weights = EdgeWeights::new(c).map_err(|e| Error::parse(end_line, 1, e.to_string()))?;
    let delta = if delta.is_empty() {
        None
    } else {
        Some(indexed(delta, nv, "delta", end_line)?)
    };
    if base_vertex >= nv || base_face >= complex.n_faces() {
        return Err(Error::parse(end_line, 1, "base vertex or face out of range"));
    }
    Ok(SolverState {
        complex,
        base_vertex,
        base_face,
        rep,
        variant,
        positions,
        weights,
        delta,
    })
}

fn indexed<T: Clone>(items: Vec<(usize, usize, T)>, n: usize, what: &str, end_line: usize) -> Result<Vec<T>> {
    let mut out: Vec<Option<T>> = vec![None; n];
    for (no, i, x) in items {
        if i >= n {
            return Err(Error::parse(no, 1, format!("{what} index {i} out of range")));
        }
        if out[i].replace(x).is_some() {
            return Err(Error::parse(no, 1, format!("duplicate {what} {i}")));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(i, x)| x.ok_or_else(|| Error::parse(end_line, 1, format!("missing {what} {i}"))))
        .collect()
}

/// `quadratic`, `sinh_half_squared` or `custom` with its samples.
pub fn variant_from_name(name: &str, samples: (Vec<f64>, Vec<f64>, Vec<f64>)) -> Result<EnergyVariant> {
    match name {
        "quadratic" => Ok(EnergyVariant::Quadratic),
        "sinh_half_squared" => Ok(EnergyVariant::SinhHalfSquared),
        "custom" => Ok(EnergyVariant::Custom(MonotoneTable::new(samples.0, samples.1, samples.2)?)),
        other => Err(Error::Domain(format!("unknown variant {other:?}"))),
    }
}

/// Custom energy table: lines `<x> <w> <w'>`.
pub fn parse_table(text: &str) -> Result<MonotoneTable> {
    let mut cols = (Vec::new(), Vec::new(), Vec::new());
    for (no, line) in content_lines(text) {
        let toks = tokens(line);
        if toks.len() != 3 {
            return Err(Error::parse(no, 1, "expected `<x> <w> <w'>`"));
        }
        cols.0.push(number(no, toks[0].0, toks[0].1, "a number")?);
        cols.1.push(number(no, toks[1].0, toks[1].1, "a number")?);
        cols.2.push(number(no, toks[2].0, toks[2].1, "a number")?);
    }
    MonotoneTable::new(cols.0, cols.1, cols.2)
}

/// `key = value` lines, in order, with their line numbers.
pub fn parse_key_values(text: &str) -> Result<Vec<(usize, String, String)>> {
    content_lines(text)
        .into_iter()
        .map(|(no, line)| {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(no, 1, "expected `key = value`"))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::parse(no, 1, "empty key"));
            }
            Ok((no, k.to_string(), v.trim().to_string()))
        })
        .collect()
}
