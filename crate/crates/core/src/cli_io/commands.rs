//! Run configuration and the `inner`, `optimize` and `render` drivers.
//!
//! Every command is a pure function of its configuration and the files it
//! names, so reports, states and pictures are byte-identical across runs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::delaunay_cert::{convexity_check, corner_weights, dual_edge_weights, polar_dual, vertex_weights};
use crate::energy::{recover_weights_sinh, EnergyVariant};
use crate::error::{Error, Result};
use crate::harmonic::{default_start, edge_lengths, random_positions, solve_harmonic, EdgeWeights, SolverOptions};
use crate::minkowski::MinkVec;
use crate::surface::MarkedSurface;
use crate::teich_opt::{deform_rep, optimize_metric_with, random_h1_direction, OuterOptions, TeichState};
use crate::tol::Tolerances;

use super::format::{
    parse_key_values, parse_mesh, parse_rep, parse_state, parse_table, variant_from_name, write_state, SolverState,
};
use super::render::render_svg;

#[derive(Clone, Debug, PartialEq)]
pub enum WeightSpec {
    Unit,
    /// Read off the polar dual of a stored Delaunay state.
    CanonicalFromDelaunay,
    /// `(edge id, weight)`; unlisted edges get `c.default`.
    Explicit(Vec<(usize, f64)>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum RepSource {
    Regular4g,
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitSpec {
    /// Averaged positions.
    Default,
    /// Seeded random positions within distance `0.5` of the base point.
    Random,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mesh: Option<PathBuf>,
    /// A state file to start from; overrides `mesh` and `rep`.
    pub state: Option<PathBuf>,
    pub rep: RepSource,
    /// `None` keeps the weights of a state, or uses `c.default` on a mesh.
    pub weights: Option<WeightSpec>,
    pub c_default: f64,
    pub variant: EnergyVariant,
    pub tol: Tolerances,
    pub seed: u64,
    pub init: InitSpec,
    /// Size of a seeded random deformation of the starting structure.
    pub perturb: f64,
    pub max_inner: usize,
    pub max_outer: usize,
    pub out_report: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
    pub out_state: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mesh: None,
            state: None,
            rep: RepSource::Regular4g,
            weights: None,
            c_default: 1.0,
            variant: EnergyVariant::Quadratic,
            tol: Tolerances::default(),
            seed: 0,
            init: InitSpec::Default,
            perturb: 0.0,
            max_inner: SolverOptions::default().max_sweeps,
            max_outer: OuterOptions::default().max_outer,
            out_report: None,
            out_svg: None,
            out_state: None,
        }
    }
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_file(path)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        RunConfig::parse(&text, dir).map_err(|e| e.in_file(path))
    }

    /// Relative paths are taken relative to `dir`.
    pub fn parse(text: &str, dir: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut variant_name = None;
        let mut table = None;
        for (no, key, value) in parse_key_values(text)? {
            let bad = |what: &str| Error::parse(no, 1, format!("{key}: expected {what}, found {value:?}"));
            let path = || dir.join(&value);
            let positive = || -> Result<f64> {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|x| *x > 0.0 && x.is_finite())
                    .ok_or_else(|| bad("a positive number"))
            };
            match key.as_str() {
                "mesh" => cfg.mesh = Some(path()),
                "state" => cfg.state = Some(path()),
                "rep" => {
                    cfg.rep = match value.as_str() {
                        "regular-4g" => RepSource::Regular4g,
                        _ => RepSource::File(path()),
                    }
                }
                "weights" => cfg.weights = Some(parse_weights(&value).map_err(|m| Error::parse(no, 1, m))?),
                "c.default" => cfg.c_default = positive()?,
                "variant" => variant_name = Some((no, value.clone())),
                "variant.table" => table = Some((no, path())),
                "seed" => cfg.seed = value.parse().map_err(|_| bad("an unsigned integer"))?,
                "init" => {
                    cfg.init = match value.as_str() {
                        "default" => InitSpec::Default,
                        "random" => InitSpec::Random,
                        _ => return Err(bad("`default` or `random`")),
                    }
                }
                "perturb" => {
                    cfg.perturb = value
                        .parse::<f64>()
                        .ok()
                        .filter(|x| *x >= 0.0 && x.is_finite())
                        .ok_or_else(|| bad("a non-negative number"))?
                }
                "max.inner" => cfg.max_inner = value.parse().map_err(|_| bad("an unsigned integer"))?,
                "max.outer" => cfg.max_outer = value.parse().map_err(|_| bad("an unsigned integer"))?,
                "out.report" => cfg.out_report = Some(path()),
                "out.svg" => cfg.out_svg = Some(path()),
                "out.state" => cfg.out_state = Some(path()),
                k if k.starts_with("tol.") => {
                    let x = positive()?;
                    let t = &mut cfg.tol;
                    let slot = match &k[4..] {
                        "hyp" => &mut t.hyp,
                        "iso" => &mut t.iso,
                        "rel" => &mut t.rel,
                        "coc" => &mut t.coc,
                        "inner" => &mut t.inner,
                        "outer" => &mut t.outer,
                        "delta" => &mut t.delta,
                        "convex" => &mut t.convex,
                        "min_length" => &mut t.min_length,
                        _ => return Err(Error::parse(no, 1, format!("unknown tolerance {k:?}"))),
                    };
                    *slot = x;
                }
                _ => return Err(Error::parse(no, 1, format!("unknown key {key:?}"))),
            }
        }
        if let Some((no, name)) = variant_name {
            cfg.variant = if name == "custom" {
                let (_, p) = table.ok_or_else(|| Error::parse(no, 1, "variant custom needs variant.table"))?;
                EnergyVariant::Custom(parse_table(&read_file(&p)?).map_err(|e| e.in_file(&p))?)
            } else {
                variant_from_name(&name, Default::default()).map_err(|e| Error::parse(no, 1, e.to_string()))?
            };
        }
        Ok(cfg)
    }

    fn inner_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol.inner,
            max_sweeps: self.max_inner,
            min_length: self.tol.min_length,
            ..SolverOptions::default()
        }
    }

    fn outer_options(&self) -> OuterOptions {
        OuterOptions {
            tol_outer: self.tol.outer,
            max_outer: self.max_outer,
            tol_rel: self.tol.rel,
            inner: self.inner_options(),
            ..OuterOptions::default()
        }
    }
}

/// `unit`, `canonical-from-delaunay`, or `id:c, id:c, ...`.
fn parse_weights(value: &str) -> std::result::Result<WeightSpec, String> {
    match value {
        "unit" => return Ok(WeightSpec::Unit),
        "canonical-from-delaunay" => return Ok(WeightSpec::CanonicalFromDelaunay),
        _ => {}
    }
    value
        .split(',')
        .map(|item| {
            let (id, c) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| format!("weights: expected `<edge id>:<weight>`, found {:?}", item.trim()))?;
            let id = id.trim().parse::<usize>().map_err(|_| format!("weights: bad edge id {id:?}"))?;
            let c = c
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|x| *x > 0.0 && x.is_finite())
                .ok_or_else(|| format!("weights: bad weight {c:?} for edge {id}"))?;
            Ok((id, c))
        })
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(WeightSpec::Explicit)
}

/// Structure, weights and starting positions described by a config.
#[derive(Clone, Debug)]
pub struct Problem {
    pub surface: MarkedSurface,
    pub weights: EdgeWeights,
    pub start: Vec<MinkVec>,
    /// Vertex weights carried over from a state file.
    pub delta: Option<Vec<f64>>,
}

pub fn load_problem(cfg: &RunConfig) -> Result<Problem> {
    let (mut surface, stored, start, delta) = if let Some(path) = &cfg.state {
        let st = parse_state(&read_file(path)?, &cfg.tol).map_err(|e| e.in_file(path))?;
        let ms = st.surface()?;
        (ms, Some(st.weights), Some(st.positions), st.delta)
    } else {
        let path = cfg
            .mesh
            .as_ref()
            .ok_or_else(|| Error::Domain("config names neither a mesh nor a state".into()))?;
        let cx = parse_mesh(&read_file(path)?).map_err(|e| e.in_file(path))?;
        let ms = MarkedSurface::regular(cx)?;
        let ms = match &cfg.rep {
            RepSource::Regular4g => ms,
            RepSource::File(p) => ms.with_rep(parse_rep(&read_file(p)?, &cfg.tol).map_err(|e| e.in_file(p))?)?,
        };
        (ms, None, None, None)
    };
    let cx = &surface.complex;
    let weights = match &cfg.weights {
        None => stored.unwrap_or_else(|| EdgeWeights::uniform(cx.n_edges(), cfg.c_default)),
        Some(WeightSpec::Unit) => EdgeWeights::uniform(cx.n_edges(), 1.0),
        Some(WeightSpec::Explicit(list)) => {
            let mut c = vec![cfg.c_default; cx.n_edges()];
            for &(id, w) in list {
                let e = (0..cx.n_edges())
                    .find(|&e| cx.edge_key(e) == id)
                    .ok_or_else(|| Error::Domain(format!("weights: no edge with id {id}")))?;
                c[e] = w;
            }
            EdgeWeights::new(c)?
        }
        Some(WeightSpec::CanonicalFromDelaunay) => {
            let (Some(f), Some(d)) = (&start, &delta) else {
                return Err(Error::Domain(
                    "canonical-from-delaunay needs a state with vertex weights".into(),
                ));
            };
            let dual = polar_dual(&surface, f, d)?;
            EdgeWeights::new(dual_edge_weights(&surface, f, &dual, cfg.tol.min_length)?)?
        }
    };
    if cfg.perturb > 0.0 {
        let dir = random_h1_direction(&surface.rep, cfg.seed)?;
        surface = surface.with_rep(deform_rep(&surface.rep, &dir, cfg.perturb, cfg.tol.rel)?)?;
    }
    let start = match (start, cfg.init) {
        (Some(f), _) => f,
        (None, InitSpec::Default) => default_start(&surface, &weights, cfg.tol.min_length),
        (None, InitSpec::Random) => random_positions(surface.complex.n_vertices(), cfg.seed, 0.5),
    };
    Ok(Problem {
        surface,
        weights,
        start,
        delta,
    })
}

fn header(out: &mut String, cmd: &str, cfg: &RunConfig, p: &Problem) {
    let cx = &p.surface.complex;
    let _ = writeln!(out, "hypdel {cmd}");
    let _ = writeln!(
        out,
        "complex: {} vertices, {} edges, {} faces, genus {}",
        cx.n_vertices(),
        cx.n_edges(),
        cx.n_faces(),
        cx.genus()
    );
    let _ = writeln!(out, "variant: {}", cfg.variant.name());
    let _ = writeln!(out, "seed: {}", cfg.seed);
}

fn trailer(out: &mut String, items: &[(&str, String)]) {
    out.push_str("\n[trailer]\n");
    for (k, v) in items {
        let _ = writeln!(out, "{k}={v}");
    }
}

fn emit(cfg: &RunConfig, report: &str, state: Option<&SolverState>) -> Result<()> {
    if let (Some(path), Some(st)) = (&cfg.out_state, state) {
        write_file(path, &write_state(st))?;
    }
    if let Some(path) = &cfg.out_report {
        write_file(path, report)?;
    }
    Ok(())
}

/// Harmonic map at the fixed structure.
pub fn cmd_inner(cfg: &RunConfig) -> Result<String> {
    let p = load_problem(cfg)?;
    let sol = solve_harmonic(&p.surface, &p.weights, &cfg.variant, &p.start, &cfg.inner_options())?;
    let ls = edge_lengths(&p.surface, &sol.positions, cfg.tol.min_length)?;
    let cx = &p.surface.complex;

    let mut out = String::new();
    header(&mut out, "inner", cfg, &p);
    let _ = writeln!(out, "sweeps: {}", sol.sweeps);
    let _ = writeln!(out, "energy: {:e}", sol.energy);
    let _ = writeln!(out, "max residual: {:e}", sol.residual);
    out.push_str("\n[edges]\nid weight length\n");
    for (e, l) in ls.iter().enumerate() {
        let _ = writeln!(out, "{} {:e} {:e}", cx.edge_key(e), p.weights.get(e), l);
    }
    trailer(
        &mut out,
        &[
            ("energy", format!("{:e}", sol.energy)),
            ("residual.inner", format!("{:e}", sol.residual)),
            ("iterations", sol.sweeps.to_string()),
        ],
    );
    let st = SolverState::from_surface(&p.surface, &cfg.variant, &sol.positions, &p.weights, None);
    emit(cfg, &out, Some(&st))?;
    Ok(out)
}

/// What `cmd_optimize` found, besides its report.
#[derive(Clone, Debug)]
pub struct OptimizeOutcome {
    pub report: String,
    pub state: TeichState,
    pub certified: bool,
}

/// Outer optimization followed by the Delaunay certificate.
pub fn cmd_optimize(cfg: &RunConfig) -> Result<OptimizeOutcome> {
    let p = load_problem(cfg)?;
    let opts = cfg.outer_options();
    let mut out = String::new();
    header(&mut out, "optimize", cfg, &p);

    out.push_str("\n[trajectory]\niter energy tau gradient step sweeps\n");
    let mut log = String::new();
    let st = optimize_metric_with(p.surface.clone(), &p.weights, &cfg.variant, &p.start, &opts, |e| {
        let _ = writeln!(
            log,
            "{} {:e} {:e} {:e} {:e} {}",
            e.iteration, e.energy, e.tau_residual, e.gradient_norm, e.step, e.inner_sweeps
        );
    })?;
    out.push_str(&log);

    let ms = &st.surface;
    let f = &st.inner.positions;
    let dual = &st.dual.dual;
    let cx = &ms.complex;
    let _ = writeln!(out, "\n[result]");
    let _ = writeln!(out, "iterations: {}", st.iterations);
    let _ = writeln!(out, "energy: {:e}", st.energy());
    let _ = writeln!(out, "inner residual: {:e}", st.inner.residual);
    let _ = writeln!(out, "tau residual: {:e}", st.tau_residual());
    let _ = writeln!(out, "max pairing coefficient: {:e}", st.max_coefficient());

    out.push_str("\n[vertex weights]\nvertex delta spread\n");
    let corners = corner_weights(ms, f, dual);
    let mut delta = Vec::with_capacity(corners.len());
    let mut spread_max = 0.0f64;
    for (i, vals) in corners.iter().enumerate() {
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        spread_max = spread_max.max(hi - lo);
        delta.push(mean);
        let _ = writeln!(out, "{i} {mean:e} {:e}", hi - lo);
    }
    let weights_ok = vertex_weights(ms, f, dual, cfg.tol.delta);
    if let Err(e) = &weights_ok {
        let _ = writeln!(out, "not a weighted Delaunay decomposition: {e}");
    }

    out.push_str("\n[convexity]\nedge margin\n");
    let conv = convexity_check(ms, f, dual, &delta);
    for e in 0..cx.n_edges() {
        let h = cx.edge_half(e);
        let m = conv.margins[h].min(conv.margins[cx.twin(h)]);
        let _ = writeln!(out, "{} {m:e}", cx.edge_key(e));
    }

    out.push_str("\n[weight recovery]\nedge input recovered rel.error\n");
    let recovered = match &cfg.variant {
        EnergyVariant::Quadratic => Some(dual_edge_weights(ms, f, dual, cfg.tol.min_length)),
        EnergyVariant::SinhHalfSquared => {
            Some(recover_weights_sinh(ms, f, dual, cfg.tol.min_length).map(|w| w.as_slice().to_vec()))
        }
        EnergyVariant::Custom(_) => None,
    };
    match recovered {
        Some(Ok(w)) => {
            for (e, r) in w.iter().enumerate() {
                let c = p.weights.get(e);
                let _ = writeln!(out, "{} {c:e} {r:e} {:e}", cx.edge_key(e), (r - c).abs() / c);
            }
        }
        Some(Err(e)) => {
            let _ = writeln!(out, "unavailable: {e}");
        }
        None => out.push_str("unavailable for a custom energy\n"),
    }

    let certified = st.is_certified(&opts) && weights_ok.is_ok() && conv.is_convex(cfg.tol.convex);
    trailer(
        &mut out,
        &[
            ("energy", format!("{:e}", st.energy())),
            ("residual.inner", format!("{:e}", st.inner.residual)),
            ("residual.tau", format!("{:e}", st.tau_residual())),
            ("certified", certified.to_string()),
            ("delta.spread.max", format!("{spread_max:e}")),
            ("convexity.margin.min", format!("{:e}", conv.min_margin)),
        ],
    );
    let saved = SolverState::from_surface(ms, &cfg.variant, f, &p.weights, certified.then_some(delta));
    emit(cfg, &out, Some(&saved))?;
    Ok(OptimizeOutcome {
        report: out,
        state: st,
        certified,
    })
}

/// Draws the state named by the config.
pub fn cmd_render(cfg: &RunConfig) -> Result<String> {
    let path = cfg
        .state
        .as_ref()
        .ok_or_else(|| Error::Domain("render needs a state file".into()))?;
    let st = parse_state(&read_file(path)?, &cfg.tol).map_err(|e| e.in_file(path))?;
    let svg = render_svg(&st, &cfg.tol)?;
    if let Some(out) = &cfg.out_svg {
        write_file(out, &svg)?;
    }
    Ok(svg)
}

/// Value of a trailer key in a report.
pub fn trailer_value<'a>(report: &'a str, key: &str) -> Option<&'a str> {
    let tail = &report[report.rfind("[trailer]")?..];
    tail.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_keys() {
        let text = "mesh = a.mesh\nweights = 10:2.5, 11:0.5\nc.default = 1.5\nvariant = sinh_half_squared\n\
                    tol.inner = 1e-9\nseed = 7\nout.report = r.txt\nrep = regular-4g\ninit = random\n";
        let cfg = RunConfig::parse(text, Path::new("/tmp/x")).unwrap();
        assert_eq!(cfg.mesh.as_deref(), Some(Path::new("/tmp/x/a.mesh")));
        assert_eq!(cfg.weights, Some(WeightSpec::Explicit(vec![(10, 2.5), (11, 0.5)])));
        assert_eq!(cfg.c_default, 1.5);
        assert_eq!(cfg.variant, EnergyVariant::SinhHalfSquared);
        assert_eq!(cfg.tol.inner, 1e-9);
        assert_eq!((cfg.seed, cfg.init), (7, InitSpec::Random));
        assert_eq!(cfg.out_report.as_deref(), Some(Path::new("/tmp/x/r.txt")));
    }

    #[test]
    fn config_errors_carry_lines() {
        for (text, line) in [
            ("seed = 1\ntol.inner = -1\n", 2),
            ("colour = red\n", 1),
            ("\n\nweights = 3:0\n", 3),
            ("variant = cubic\n", 1),
            ("variant = custom\n", 1),
        ] {
            match RunConfig::parse(text, Path::new(".")) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn trailer_lookup() {
        let r = "x\n[trailer]\nenergy=1e0\ncertified=true\n";
        assert_eq!(trailer_value(r, "certified"), Some("true"));
        assert_eq!(trailer_value(r, "energy"), Some("1e0"));
        assert_eq!(trailer_value(r, "residual"), None);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Error::parse(1, 1, "x").exit_code(), 3);
        assert_eq!(Error::Genus(1).exit_code(), 3);
        assert_eq!(Error::Convergence { iterations: 1, residual: 1.0 }.exit_code(), 2);
        assert_eq!(Error::Closure(1.0).exit_code(), 2);
    }
}
