/// Numerical tolerances shared by every module.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Hyperboloid membership `|<v,v> + 1|`.
    pub hyp: f64,
    /// Isometry check `|M^T J M - J|`.
    pub iso: f64,
    /// Relator residual of a holonomy representation.
    pub rel: f64,
    /// Relator residual of a generator cocycle.
    pub coc: f64,
    /// Harmonic residual for the inner solver.
    pub inner: f64,
    /// Coboundary residual of the translation cocycle for the outer loop.
    pub outer: f64,
    /// Vertex weight spread.
    pub delta: f64,
    /// Local convexity margin.
    pub convex: f64,
    /// Shortest admissible edge.
    pub min_length: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hyp: 1e-12,
            iso: 1e-10,
            rel: 1e-9,
            coc: 1e-8,
            inner: 1e-10,
            outer: 1e-6,
            delta: 1e-6,
            convex: 1e-6,
            min_length: 1e-8,
        }
    }
}
