//! Minkowski space R^{2,1} with signature (+,+,-), the hyperboloid model of
//! the hyperbolic plane, the isometry group SO+(2,1) and its Lie algebra.
//!
//! Lie algebra elements are carried as vectors: an element `a` of so(2,1)
//! acts on R^{2,1} by `a(x) = v × x` where `v` is its image under the
//! isomorphism η and `×` is the Minkowski cross product. [`lie_matrix`]
//! recovers the 3×3 matrix and [`lie_vector`] goes back.

use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// A vector of R^{2,1}; the third coordinate is time-like.
pub type MinkVec = Vector3<f64>;

/// The η-image of an element of so(2,1).
pub type LieVec = Vector3<f64>;

/// The Gram matrix `J = diag(1, 1, -1)`.
pub fn gram() -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0))
}

pub const E1: MinkVec = Vector3::new(1.0, 0.0, 0.0);
pub const E2: MinkVec = Vector3::new(0.0, 1.0, 0.0);
pub const E0: MinkVec = Vector3::new(0.0, 0.0, 1.0);

#[inline]
pub fn inner(x: &MinkVec, y: &MinkVec) -> f64 {
    x[0] * y[0] + x[1] * y[1] - x[2] * y[2]
}

#[inline]
pub fn cross(x: &MinkVec, y: &MinkVec) -> MinkVec {
    Vector3::new(
        x[1] * y[2] - y[1] * x[2],
        x[2] * y[0] - x[0] * y[2],
        -(x[0] * y[1] - x[1] * y[0]),
    )
}

/// Length `sqrt(<x,x>)` of a space-like vector, `0` for anything else.
#[inline]
pub fn norm(x: &MinkVec) -> f64 {
    inner(x, x).max(0.0).sqrt()
}

/// `arccosh` in the log1p form, accurate for arguments close to one.
pub fn acosh_stable(x: f64) -> f64 {
    let t = x - 1.0;
    if t <= 0.0 {
        return 0.0;
    }
    (t + (t * (x + 1.0)).sqrt()).ln_1p()
}

/// Sup-norm of a matrix.
pub(crate) fn max_abs(m: &Matrix3<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// A point of the upper sheet `<v,v> = -1, v3 > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperboloidPoint(MinkVec);

impl HyperboloidPoint {
    pub fn new(v: MinkVec, tol: f64) -> Result<Self> {
        if (inner(&v, &v) + 1.0).abs() > tol || v[2] <= 0.0 {
            return Err(Error::Domain(format!(
                "({}, {}, {}) is not on the hyperboloid",
                v[0], v[1], v[2]
            )));
        }
        Ok(HyperboloidPoint(v))
    }

    /// The base point `e0`.
    pub fn origin() -> Self {
        HyperboloidPoint(E0)
    }

    /// Point at distance `r` from the origin in direction `theta`.
    pub fn polar(r: f64, theta: f64) -> Self {
        HyperboloidPoint(Vector3::new(
            r.sinh() * theta.cos(),
            r.sinh() * theta.sin(),
            r.cosh(),
        ))
    }

    pub fn vec(&self) -> &MinkVec {
        &self.0
    }

    pub fn into_vec(self) -> MinkVec {
        self.0
    }
}

/// Central projection onto the hyperboloid.
pub fn project_hyperboloid(x: &MinkVec) -> Result<HyperboloidPoint> {
    let q = -inner(x, x);
    if q <= 0.0 || x[2] <= 0.0 {
        return Err(Error::Domain(format!(
            "({}, {}, {}) is not future time-like",
            x[0], x[1], x[2]
        )));
    }
    Ok(HyperboloidPoint(x / q.sqrt()))
}

/// Hyperbolic distance `arccosh(-<p,q>)`.
pub fn hyp_distance(p: &HyperboloidPoint, q: &HyperboloidPoint, tol: f64) -> Result<f64> {
    let c = -inner(p.vec(), q.vec());
    if c < 1.0 - tol {
        return Err(Error::Domain(format!("-<p,q> = {c} < 1")));
    }
    Ok(acosh_stable(c))
}

/// Unit tangent vector at `x` pointing along `v` (projected to the tangent plane).
pub fn tangent_unit(x: &MinkVec, v: &MinkVec) -> Option<MinkVec> {
    let t = v + inner(v, x) * x;
    let n = norm(&t);
    (n > 0.0).then(|| t / n)
}

/// Exponential map of the hyperboloid at `x` applied to the tangent vector `v`.
pub fn exp_map(x: &MinkVec, v: &MinkVec) -> MinkVec {
    let n = norm(v);
    if n < 1e-300 {
        return *x;
    }
    x * n.cosh() + v * (n.sinh() / n)
}

/// Orthonormal tangent frame at a hyperboloid point (Gram–Schmidt of e1, e2).
pub fn tangent_frame(x: &MinkVec) -> [MinkVec; 2] {
    let t1 = tangent_unit(x, &E1).expect("e1 is never normal to the hyperboloid");
    let mut t2 = E2 + inner(&E2, x) * x;
    t2 -= inner(&t2, &t1) * t1;
    let t2 = t2 / norm(&t2);
    [t1, t2]
}

/// Matrix of the Lie algebra element with η-image `v`: `lie_matrix(v) x = v × x`.
pub fn lie_matrix(v: &LieVec) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -v[2], v[1], //
        v[2], 0.0, -v[0], //
        v[1], -v[0], 0.0,
    )
}

/// Alias of [`lie_matrix`] under the name of the inverse isomorphism.
pub fn eta_inv(v: &LieVec) -> Matrix3<f64> {
    lie_matrix(v)
}

/// η: recovers `v` from a J-antisymmetric matrix `A` with `A x = v × x`.
pub fn lie_vector(a: &Matrix3<f64>) -> LieVec {
    // A = J [v]_x, so J A = [v]_x.
    Vector3::new(-a[(2, 1)], a[(0, 2)], a[(1, 0)])
}

/// Normalized trace form `tr(ab)/2`; equals `<η(a), η(b)>`.
pub fn killing(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    0.5 * (a * b).trace()
}

/// `|u × (v × u) - (-<u,u> v + <u,v> u)|_inf`.
pub fn triple_cross_check(u: &MinkVec, v: &MinkVec) -> f64 {
    let lhs = cross(u, &cross(v, u));
    let rhs = -inner(u, u) * v + inner(u, v) * u;
    (lhs - rhs).amax()
}

/// `|η(g a g^{-1}) - g η(a)|_inf`, computed through matrices.
pub fn adjoint_identity_check(g: &Isometry, v: &LieVec) -> f64 {
    let a = lie_matrix(v);
    let conj = g.matrix() * a * g.inverse().matrix();
    (lie_vector(&conj) - g.apply(v)).amax()
}

/// An element of SO+(2,1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Isometry(Matrix3<f64>);

impl Isometry {
    pub fn identity() -> Self {
        Isometry(Matrix3::identity())
    }

    /// Wraps a matrix without checking; see [`Isometry::defect`].
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Isometry(m)
    }

    /// Wraps a matrix after checking `M^T J M = J`, `det = 1` and that the
    /// upper sheet is preserved.
    pub fn from_matrix(m: Matrix3<f64>, tol: f64) -> Result<Self> {
        let iso = Isometry(m);
        let d = iso.defect();
        if d > tol * m.amax().powi(2).max(1.0) {
            return Err(Error::Domain(format!("matrix is not in SO(2,1): defect {d:e}")));
        }
        if (m.determinant() - 1.0).abs() > 1e-6 || m[(2, 2)] <= 0.0 {
            return Err(Error::Domain("matrix is not in the identity component".into()));
        }
        Ok(iso)
    }

    /// Rotation by `theta` about the e0 axis.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Isometry(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    /// Translation by hyperbolic distance `d` along the e1 axis.
    pub fn boost(d: f64) -> Self {
        let (s, c) = (d.sinh(), d.cosh());
        Isometry(Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, s, 0.0, c))
    }

    /// The translation along the geodesic through the origin that moves
    /// `p` to the origin.
    pub fn recentering(p: &MinkVec) -> Self {
        let r = acosh_stable(p[2]);
        let theta = p[1].atan2(p[0]);
        Isometry::rotation(theta) * Isometry::boost(-r) * Isometry::rotation(-theta)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// `J M^T J`.
    pub fn inverse(&self) -> Self {
        let j = gram();
        Isometry(j * self.0.transpose() * j)
    }

    pub fn apply(&self, v: &MinkVec) -> MinkVec {
        self.0 * v
    }

    /// `|M^T J M - J|_inf`.
    pub fn defect(&self) -> f64 {
        let j = gram();
        max_abs(&(self.0.transpose() * j * self.0 - j))
    }

    /// Distance from the identity in the sup norm.
    pub fn distance_to_identity(&self) -> f64 {
        max_abs(&(self.0 - Matrix3::identity()))
    }

    /// Re-orthonormalizes the columns with Minkowski Gram–Schmidt, time-like
    /// column first.
    pub fn reorthonormalize(&self) -> Self {
        let m = &self.0;
        let c3: MinkVec = m.column(2).into();
        let c3 = c3 / (-inner(&c3, &c3)).sqrt();
        let mut c1: MinkVec = m.column(0).into();
        c1 += inner(&c1, &c3) * c3;
        c1 /= norm(&c1);
        let mut c2: MinkVec = m.column(1).into();
        c2 += inner(&c2, &c3) * c3;
        c2 -= inner(&c2, &c1) * c1;
        c2 /= norm(&c2);
        Isometry(Matrix3::from_columns(&[c1, c2, c3]))
    }

    /// Nearest isometry in the polar sense, `M N^{-1/2}` with
    /// `N = J M^T J M`, by two Newton–Schulz steps. Unlike Gram–Schmidt it
    /// commutes with conjugation, so gauge-equivalent inputs stay
    /// gauge-equivalent.
    pub fn project(&self) -> Self {
        let j = gram();
        let mut m = self.0;
        for _ in 0..2 {
            let n = j * m.transpose() * j * m;
            m = m * (Matrix3::identity() * 3.0 - n) * 0.5;
        }
        Isometry(m)
    }

    /// `Ad g` acting on η-images: `g v`.
    pub fn adjoint(&self, v: &LieVec) -> LieVec {
        self.0 * v
    }
}

impl Mul for Isometry {
    type Output = Isometry;
    fn mul(self, rhs: Isometry) -> Isometry {
        Isometry(self.0 * rhs.0)
    }
}

impl Mul<&Isometry> for &Isometry {
    type Output = Isometry;
    fn mul(self, rhs: &Isometry) -> Isometry {
        Isometry(self.0 * rhs.0)
    }
}

/// Matrix exponential of `t · lie_matrix(v)` by scaling and squaring with a
/// Taylor series on the scaled matrix.
pub fn exp_so21(v: &LieVec, t: f64) -> Isometry {
    let a = lie_matrix(v) * t;
    let n = max_abs(&a) * 3.0;
    let mut squarings = 0;
    let mut scale = 1.0;
    while n * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let b = a * scale;
    let mut term = Matrix3::identity();
    let mut sum = Matrix3::identity();
    for k in 1..=14 {
        term = term * b / k as f64;
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    Isometry(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(rng: &mut ChaCha8Rng) -> MinkVec {
        Vector3::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        )
    }

    #[test]
    fn recentering_moves_point_to_origin() {
        let p = *HyperboloidPoint::polar(1.7, 2.3).vec();
        let t = Isometry::recentering(&p);
        assert!((t.apply(&p) - E0).amax() < 1e-12);
        assert!(t.defect() < 1e-12);
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(inner(&E0, &E0), -1.0);
        assert_eq!(inner(&E1, &E2), 0.0);
        let x = Vector3::new(1.0, 2.0, 2.0);
        assert_eq!(inner(&x, &x), 1.0);
    }

    #[test]
    fn cross_product_examples() {
        assert_eq!(cross(&E1, &E2), Vector3::new(0.0, 0.0, -1.0));
        let x = Vector3::new(0.3, -1.2, 2.0);
        assert_eq!(cross(&x, &x), Vector3::zeros());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let (x, y) = (rand_vec(&mut rng), rand_vec(&mut rng));
            let z = cross(&x, &y);
            assert!(inner(&z, &x).abs() < 1e-12);
            assert!(inner(&z, &y).abs() < 1e-12);
        }
    }

    #[test]
    fn distance_examples() {
        let p = HyperboloidPoint::origin();
        assert_eq!(hyp_distance(&p, &p, 1e-12).unwrap(), 0.0);
        let q = HyperboloidPoint::polar(1.0, 0.0);
        assert!((hyp_distance(&p, &q, 1e-12).unwrap() - 1.0).abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let a = HyperboloidPoint::polar(rng.random_range(0.0..3.0), rng.random_range(0.0..6.3));
            let b = HyperboloidPoint::polar(rng.random_range(0.0..3.0), rng.random_range(0.0..6.3));
            let d1 = hyp_distance(&a, &b, 1e-12).unwrap();
            let d2 = norm(&cross(a.vec(), b.vec())).asinh();
            assert!((d1 - d2).abs() < 1e-10, "{d1} {d2}");
        }
    }

    #[test]
    fn distance_rejects_non_hyperboloid_pairs() {
        let p = HyperboloidPoint(Vector3::new(0.0, 0.0, 0.5));
        assert!(hyp_distance(&p, &p, 1e-12).is_err());
    }

    #[test]
    fn projection_examples() {
        let p = project_hyperboloid(&Vector3::new(0.0, 0.0, 2.0)).unwrap();
        assert_eq!(*p.vec(), E0);
        let q = project_hyperboloid(&Vector3::new(1.0, 0.0, 2.0)).unwrap();
        assert!((q.vec() - Vector3::new(1.0, 0.0, 2.0) / 3f64.sqrt()).amax() < 1e-15);
        let r = project_hyperboloid(q.vec()).unwrap();
        assert!((r.vec() - q.vec()).amax() < 1e-15);
        assert!(project_hyperboloid(&Vector3::new(2.0, 0.0, 1.0)).is_err());
        assert!(project_hyperboloid(&Vector3::new(0.0, 0.0, -1.0)).is_err());
    }

    #[test]
    fn lie_matrix_examples() {
        assert_eq!(lie_matrix(&Vector3::zeros()), Matrix3::zeros());
        let v = Vector3::new(0.4, -1.1, 0.7);
        let a = lie_matrix(&v);
        for e in [E1, E2, E0] {
            assert!((a * e - cross(&v, &e)).amax() < 1e-15);
        }
        let j = gram();
        assert!(max_abs(&(a.transpose() * j + j * a)) < 1e-15);
        assert_eq!(lie_vector(&a), v);
    }

    #[test]
    fn adjoint_identity_examples() {
        assert_eq!(adjoint_identity_check(&Isometry::identity(), &Vector3::new(1.0, 2.0, 3.0)), 0.0);
        let g = Isometry::rotation(0.7);
        assert!(adjoint_identity_check(&g, &E0) < 1e-15);
        let g = Isometry::rotation(0.3) * Isometry::boost(1.2) * Isometry::rotation(-2.0);
        assert!(adjoint_identity_check(&g, &Vector3::new(0.2, 0.5, -0.4)) < 1e-12);
    }

    #[test]
    fn triple_cross_examples() {
        let u = Vector3::new(0.3, 0.1, 1.4);
        assert!(triple_cross_check(&u, &u) < 1e-15);
        assert!(triple_cross_check(&E0, &E1) == 0.0);
        assert_eq!(cross(&E0, &cross(&E1, &E0)), E1);
    }

    #[test]
    fn exp_examples() {
        let v = Vector3::new(0.3, -0.2, 0.9);
        assert!(exp_so21(&v, 0.0).distance_to_identity() < 1e-15);
        // rotation oracle about e0
        for theta in [0.1, 1.0, 2.5, -4.0] {
            let r = exp_so21(&E0, theta);
            assert!(max_abs(&(r.matrix() - Isometry::rotation(theta).matrix())) < 1e-13);
        }
        // boost oracle: lie_matrix(e2) generates translation along e1
        let b = exp_so21(&E2, 1.3);
        assert!(max_abs(&(b.matrix() - Isometry::boost(1.3).matrix())) < 1e-12);
        let (a, b, c) = (exp_so21(&v, 0.4), exp_so21(&v, 1.1), exp_so21(&v, 1.5));
        assert!(max_abs(&((a * b).matrix() - c.matrix())) < 1e-10);
        let big = exp_so21(&Vector3::new(1.5, -2.0, 0.4), 1.7);
        assert!(big.defect() < 1e-10 * big.matrix().amax().powi(2));
    }

    #[test]
    fn reorthonormalize_repairs_noise() {
        let g = Isometry::rotation(0.3) * Isometry::boost(0.9);
        let noisy = Isometry(g.matrix() + Matrix3::repeat(1e-7));
        let fixed = noisy.reorthonormalize();
        assert!(fixed.defect() < 1e-13);
        assert!(max_abs(&(fixed.matrix() - g.matrix())) < 1e-6);
    }

    #[test]
    fn killing_form_is_inner_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let (v, w) = (rand_vec(&mut rng), rand_vec(&mut rng));
            let k = killing(&lie_matrix(&v), &lie_matrix(&w));
            assert!((k - inner(&v, &w)).abs() < 1e-12);
        }
    }
}
