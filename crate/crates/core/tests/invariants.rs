use proptest::prelude::*;

use hypdel::cli_io::{parse_mesh, write_mesh};
use hypdel::energy::EnergyVariant;
use hypdel::fixtures;
use hypdel::fuchsian::{build_regular_4g_group, evaluate_word};
use hypdel::harmonic::{default_start, dirichlet_energy, EdgeWeights};
use hypdel::minkowski::{
    exp_so21, hyp_distance, inner, triple_cross_check, HyperboloidPoint, Isometry, LieVec, MinkVec,
};
use hypdel::surface::MarkedSurface;
use hypdel::word::Word;

fn vec3(r: f64) -> impl Strategy<Value = MinkVec> {
    (-r..r, -r..r, -r..r).prop_map(|(a, b, c)| MinkVec::new(a, b, c))
}

fn isometry() -> impl Strategy<Value = Isometry> {
    (-3.0..3.0f64, -1.5..1.5f64, -3.0..3.0f64)
        .prop_map(|(a, d, b)| Isometry::rotation(a) * Isometry::boost(d) * Isometry::rotation(b))
}

fn point() -> impl Strategy<Value = HyperboloidPoint> {
    (0.0..3.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| HyperboloidPoint::polar(r, t))
}

fn word() -> impl Strategy<Value = Word> {
    prop::collection::vec((1..=4i32, any::<bool>()), 0..12)
        .prop_map(|ls| Word::from_letters(ls.into_iter().map(|(k, s)| if s { k } else { -k })))
}

fn rel(a: &Isometry, b: &Isometry) -> f64 {
    (a.matrix() - b.matrix()).amax() / a.matrix().amax().max(1.0)
}

proptest! {
    #[test]
    fn isometries_keep_the_form(g in isometry(), x in vec3(5.0), y in vec3(5.0)) {
        let scale = 1.0 + g.matrix().amax().powi(2) * x.amax() * y.amax();
        prop_assert!((inner(&g.apply(&x), &g.apply(&y)) - inner(&x, &y)).abs() < 1e-11 * scale);
    }

    #[test]
    fn double_cross(u in vec3(3.0), v in vec3(3.0)) {
        prop_assert!(triple_cross_check(&u, &v) < 1e-11 * (1.0 + u.norm_squared() * v.norm()));
    }

    #[test]
    fn exponential_is_a_one_parameter_group(v in vec3(1.0), s in -1.0..1.0f64, t in -1.0..1.0f64) {
        let v: LieVec = v;
        let a = exp_so21(&v, s) * exp_so21(&v, t);
        prop_assert!(rel(&a, &exp_so21(&v, s + t)) < 1e-12);
        prop_assert!(exp_so21(&v, s).defect() < 1e-12);
    }

    #[test]
    fn projection_commutes_with_conjugation(g in isometry(), h in isometry(), noise in vec3(1e-7)) {
        let bent = Isometry::from_matrix_unchecked(g.matrix() + nalgebra::Matrix3::from_diagonal(&noise));
        let p = bent.project();
        prop_assert!(p.defect() < 1e-11 * g.matrix().amax().powi(2));
        let conj = |m: &Isometry| h * *m * h.inverse();
        let lhs = conj(&bent).project();
        let rhs = conj(&p);
        prop_assert!(rel(&lhs, &rhs) < 1e-9);
    }

    #[test]
    fn distance_is_a_metric(p in point(), q in point(), r in point()) {
        let d = |a: &HyperboloidPoint, b: &HyperboloidPoint| hyp_distance(a, b, 1e-9).unwrap();
        prop_assert!((d(&p, &q) - d(&q, &p)).abs() < 1e-9);
        prop_assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-7);
    }

    #[test]
    fn words_form_a_group(a in word(), b in word()) {
        prop_assert!(a.concat(&a.inverse()).is_empty());
        prop_assert_eq!(a.concat(&b).inverse(), b.inverse().concat(&a.inverse()));
        prop_assert_eq!(a.to_string().parse::<Word>().unwrap(), a.clone());
        let ab: Vec<i64> = a.abelianization(4).iter().zip(b.abelianization(4)).map(|(x, y)| x + y).collect();
        prop_assert_eq!(a.concat(&b).abelianization(4), ab);
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in word(), b in word()) {
        let rep = build_regular_4g_group(2).unwrap();
        let lhs = evaluate_word(&rep, &a.concat(&b));
        let (ga, gb) = (evaluate_word(&rep, &a), evaluate_word(&rep, &b));
        // cancellation between a and b leaves the rounding of each factor
        let scale = ga.matrix().amax() * gb.matrix().amax();
        prop_assert!((lhs.matrix() - (ga * gb).matrix()).amax() < 1e-13 * scale);
    }

    #[test]
    fn quadratic_energy_is_linear_in_the_weights(ws in prop::collection::vec(0.1..3.0f64, 12), s in 0.1..5.0f64) {
        let ms = MarkedSurface::regular(fixtures::octagon_with_center()).unwrap();
        let c = EdgeWeights::new(ws).unwrap();
        let f = default_start(&ms, &c, 1e-8);
        let q = EnergyVariant::Quadratic;
        let e = dirichlet_energy(&ms, &f, &c, &q, 1e-8).unwrap();
        let es = dirichlet_energy(&ms, &f, &c.scaled(s), &q, 1e-8).unwrap();
        prop_assert!((es - s * e).abs() < 1e-10 * es.abs().max(1.0));
    }

    #[test]
    fn energy_ignores_a_change_of_gauge(g in isometry()) {
        let ms = MarkedSurface::regular(fixtures::octagon_with_center()).unwrap();
        let c = EdgeWeights::uniform(ms.complex.n_edges(), 1.0);
        let f = default_start(&ms, &c, 1e-8);
        let moved = ms.with_rep(ms.rep.conjugate(&g)).unwrap();
        let fg: Vec<MinkVec> = f.iter().map(|x| g.apply(x)).collect();
        let q = EnergyVariant::Quadratic;
        let e = dirichlet_energy(&ms, &f, &c, &q, 1e-8).unwrap();
        let eg = dirichlet_energy(&moved, &fg, &c, &q, 1e-8).unwrap();
        prop_assert!((e - eg).abs() < 1e-8 * e);
    }
}

#[test]
fn meshes_survive_a_round_trip() {
    for cx in fixtures::all_complexes() {
        let text = write_mesh(&cx);
        let back = parse_mesh(&text).unwrap();
        assert_eq!(write_mesh(&back), text);
        assert_eq!(back.n_edges(), cx.n_edges());
        assert_eq!(back.n_vertices(), cx.n_vertices());
    }
}
