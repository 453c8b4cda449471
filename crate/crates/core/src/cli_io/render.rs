//! Static SVG of one fundamental domain in the Klein model. Geodesics are
//! chords there, so every edge is an exact line segment.

use std::fmt::Write as _;

use crate::dual_cocycle::{equivariant_dual, integrate_dual, DualRealization};
use crate::error::Result;
use crate::minkowski::{MinkVec, E0};
use crate::tol::Tolerances;

use super::format::SolverState;

const SIZE: f64 = 800.0;
const RADIUS: f64 = 360.0;

/// `(x1/x3, x2/x3)`, or `None` behind the projection plane.
pub fn klein(p: &MinkVec) -> Option<(f64, f64)> {
    (p[2] > 0.0).then(|| (p[0] / p[2], p[1] / p[2]))
}

fn screen(p: &MinkVec) -> Option<(f64, f64)> {
    klein(p).map(|(x, y)| (SIZE / 2.0 + RADIUS * x, SIZE / 2.0 - RADIUS * y))
}

/// The dual drawn next to the primal: the polar dual when vertex weights
/// are stored, otherwise the integrated dual moved to its equivariant
/// position.
fn dual_for(st: &SolverState, tol: &Tolerances) -> Result<DualRealization> {
    let ms = st.surface()?;
    if let Some(delta) = &st.delta {
        return crate::delaunay_cert::polar_dual(&ms, &st.positions, delta);
    }
    let dual = integrate_dual(&ms, &st.positions, &st.weights, &st.variant, E0, tol.min_length)?;
    Ok(equivariant_dual(&ms, &dual, tol.inner.max(dual.max_closure()))
        .map(|eq| eq.dual)
        .unwrap_or(dual))
}

fn segment(s: &mut String, class: &str, a: Option<(f64, f64)>, b: Option<(f64, f64)>) -> bool {
    let (Some(a), Some(b)) = (a, b) else {
        return false;
    };
    let _ = writeln!(
        s,
        r#"<line class="{class}" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
        a.0, a.1, b.0, b.1
    );
    true
}

pub fn render_svg(st: &SolverState, tol: &Tolerances) -> Result<String> {
    let ms = st.surface()?;
    let cx = &ms.complex;
    let dual = dual_for(st, tol)?;
    let corner = |h: usize| ms.corner_matrix(h).apply(&st.positions[cx.origin(h)]);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    s.push_str(
        "<style>\n.primal{stroke:#1f3b73;stroke-width:1.6}\n\
         .dual{stroke:#b5472c;stroke-width:1.1;stroke-dasharray:6 4}\n\
         .vertex{fill:#1f3b73}\ntext{font:12px sans-serif;fill:#333}\n</style>\n",
    );
    let _ = writeln!(
        s,
        r##"<circle class="boundary" cx="{c}" cy="{c}" r="{RADIUS}" fill="none" stroke="#888"/>"##,
        c = SIZE / 2.0
    );

    for e in 0..cx.n_edges() {
        let h = cx.edge_half(e);
        segment(&mut s, "primal", screen(&corner(h)), screen(&corner(cx.next(h))));
    }
    for e in 0..cx.n_edges() {
        let h = cx.edge_half(e);
        let left = dual.faces[cx.face(h)];
        let right = ms.transition_matrix(h).apply(&dual.faces[cx.face(cx.twin(h))]);
        segment(&mut s, "dual", screen(&left), screen(&right));
    }
    for i in 0..cx.n_vertices() {
        let h = cx.outgoing(i)[0];
        let Some((x, y)) = screen(&corner(h)) else { continue };
        let _ = writeln!(s, r#"<circle class="vertex" cx="{x:.3}" cy="{y:.3}" r="3.5"/>"#);
        let label = match &st.delta {
            Some(d) => format!("v{i} δ={:.6}", d[i]),
            None => format!("v{i}"),
        };
        let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}">{label}</text>"#, x + 6.0, y - 6.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::harmonic::EdgeWeights;
    use crate::energy::EnergyVariant;

    fn octagon_state() -> SolverState {
        let fx = fixtures::delaunay_octagon();
        let c = EdgeWeights::uniform(fx.surface.complex.n_edges(), 1.0);
        SolverState::from_surface(&fx.surface, &EnergyVariant::Quadratic, &fx.positions, &c, Some(fx.delta))
    }

    #[test]
    fn octagon_picture() {
        let st = octagon_state();
        let svg = render_svg(&st, &Tolerances::default()).unwrap();
        assert_eq!(svg.matches(r#"class="primal""#).count(), 12);
        assert_eq!(svg.matches(r#"class="dual""#).count(), 12);
        assert_eq!(svg.matches("δ=").count(), 2);
        assert_eq!(svg, render_svg(&st, &Tolerances::default()).unwrap());
    }

    #[test]
    fn without_weights_the_integrated_dual_is_drawn() {
        let mut st = octagon_state();
        st.delta = None;
        let svg = render_svg(&st, &Tolerances::default()).unwrap();
        assert_eq!(svg.matches(r#"class="dual""#).count(), 12);
        assert!(!svg.contains("δ="));
    }

    #[test]
    fn projection_is_central() {
        let p = MinkVec::new(0.3, -0.4, 2.0);
        let (x, y) = klein(&(3.0 * p)).unwrap();
        assert!((x - 0.15).abs() < 1e-15 && (y + 0.2).abs() < 1e-15);
        assert!(klein(&MinkVec::new(1.0, 0.0, -1.0)).is_none());
    }
}
