use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nconn::expr::{eval, parse, simplify, Expr, Point};
use nconn::geometry::*;
use nconn::random::random_geometry;
use nconn::sample::{random_points, rel_dev, Evaluator};

fn box_points(geo: &NGeometry, seed: u64, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_points(&mut rng, &vec![(-1.0, 1.0); geo.dim()], count)
}

fn values(geo: &NGeometry, fields: &[&ComponentField], pts: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let ev = Evaluator::for_fields(geo.chart(), fields, &geo.determinants()).unwrap();
    ev.eval_many(pts).into_iter().map(|r| r.unwrap()).collect()
}

fn max_abs(rows: &[Vec<f64>]) -> f64 {
    rows.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn geometry_1d(g: &str, h: &str, n: &str) -> NGeometry {
    let chart = SplitChart::new(["x"], ["y"]).unwrap();
    let p = |s| parse(s, &chart).unwrap();
    NGeometry::new(
        chart.clone(),
        DMetric::diagonal(vec![p(g)], vec![p(h)]),
        NConnection::from_rows(vec![vec![p(n)]]).unwrap(),
    )
    .unwrap()
}

#[test]
fn frame_and_coframe_are_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let geo = random_geometry(&mut rng, 3, 2, true).unwrap();
    let (e, theta) = frames(geo.nconnection());
    let prod = linalg::matmul(&theta, &e);
    for (i, row) in prod.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let s = simplify(v);
            assert_eq!(s.as_const(), Some(if i == j { 1.0 } else { 0.0 }), "{i}{j}: {s}");
        }
    }
}

#[test]
fn holonomic_frames_are_identity() {
    let (e, t) = frames(&NConnection::zero(2, 2));
    assert_eq!(e, linalg::identity(4));
    assert_eq!(t, linalg::identity(4));
}

#[test]
fn coframe_read_off() {
    let chart = SplitChart::five_dimensional();
    let mut nc = NConnection::zero(3, 2);
    nc.set(1, 0, Expr::coord("v"));
    let (_, theta) = frames(&nc);
    // ϑ⁴ = dy⁴ + v dx²
    assert_eq!(theta[3][1], Expr::coord("v"));
    assert!(theta[3][3].is_one());
    assert_eq!(chart.name(3), "v");
}

#[test]
fn elongated_derivative_examples() {
    let chart = SplitChart::five_dimensional();
    let mut nc = NConnection::zero(3, 2);
    nc.set(1, 1, Expr::coord("x3"));
    let e = Expr::coord("y5");
    assert_eq!(simplify(&elongated_diff(&e, 1, &chart, &nc)), simplify(&-Expr::coord("x3")));
    let f = parse("x2^2*v + sin(x3*y5)", &chart).unwrap();
    let zero = NConnection::zero(3, 2);
    for i in 0..3 {
        assert_eq!(
            simplify(&elongated_diff(&f, i, &chart, &zero)),
            simplify(&nconn::expr::diff(&f, chart.name(i)))
        );
    }
}

#[test]
fn anholonomy_examples() {
    let chart = SplitChart::five_dimensional();
    let mut nc = NConnection::zero(3, 2);
    nc.set(1, 0, Expr::coord("v"));
    let geo = NGeometry::new(
        chart.clone(),
        DMetric::diagonal(vec![Expr::one(); 3], vec![Expr::one(); 2]),
        nc,
    )
    .unwrap();
    // W^4_{2,4} = ∂_v N_2^4 = 1
    assert!(simplify(geo.w(3, 1, 3)).is_one());
    assert_eq!(simplify(geo.w(3, 3, 1)).as_const(), Some(-1.0));

    let mut nc = NConnection::zero(3, 2);
    nc.set(1, 0, Expr::coord("x3"));
    let geo = NGeometry::new(
        chart,
        DMetric::diagonal(vec![Expr::one(); 3], vec![Expr::one(); 2]),
        nc,
    )
    .unwrap();
    // Ω^4_{23} = e_2 N_3^4 − e_3 N_2^4 = −1
    assert_eq!(simplify(geo.omega().get(&[0, 1, 2])).as_const(), Some(-1.0));
    assert!(geo.anholonomy().check_symmetries().is_ok());
}

/// Coordinate components of `e_α` at `pt`.
fn frame_vector(geo: &NGeometry, pt: &[f64], alpha: usize) -> Vec<f64> {
    let (e, _) = frames(geo.nconnection());
    let mut p = Point::new();
    for (k, v) in pt.iter().enumerate() {
        p.set(geo.chart().name(k), *v);
    }
    (0..geo.dim()).map(|mu| eval(&e[mu][alpha], &p).unwrap()).collect()
}

#[test]
fn anholonomy_matches_finite_difference_commutators() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let geo = random_geometry(&mut rng, 2, 2, false).unwrap();
    let d = geo.dim();
    let pts = box_points(&geo, 6, 10);
    let w = values(&geo, &[geo.anholonomy()], &pts);
    let h = 1e-5;
    for (pt, wv) in pts.iter().zip(&w) {
        for a in 0..d {
            for b in 0..d {
                // [X, Y]^μ = X^ν ∂_ν Y^μ − Y^ν ∂_ν X^μ
                let x = frame_vector(&geo, pt, a);
                let y = frame_vector(&geo, pt, b);
                let deriv = |dir: &[f64], which: usize| -> Vec<f64> {
                    let shift = |s: f64| {
                        let q: Vec<f64> = pt.iter().zip(dir).map(|(p, v)| p + s * v).collect();
                        frame_vector(&geo, &q, which)
                    };
                    let (p1, m1) = (shift(h), shift(-h));
                    p1.iter().zip(&m1).map(|(u, v)| (u - v) / (2.0 * h)).collect()
                };
                let dy = deriv(&x, b);
                let dx = deriv(&y, a);
                let br: Vec<f64> = dy.iter().zip(&dx).map(|(u, v)| u - v).collect();
                // bracket in coordinates = W^γ_{ab} e_γ
                for mu in 0..d {
                    let want: f64 = (0..d)
                        .map(|g| wv[g * d * d + a * d + b] * frame_vector(&geo, pt, g)[mu])
                        .sum();
                    assert!((br[mu] - want).abs() < 1e-5, "[e{a},e{b}]^{mu}: {} vs {want}", br[mu]);
                }
            }
        }
    }
}

#[test]
fn full_metric_examples() {
    let geo = geometry_1d("1", "1", "x*y + 2");
    let full = assemble_full_metric(geo.metric(), geo.nconnection());
    let p = Point::new().with("x", 0.5).with("y", 2.0);
    let f = 3.0;
    assert!((eval(full.get(&[0, 0]), &p).unwrap() - (1.0 + f * f)).abs() < 1e-14);
    assert!((eval(full.get(&[0, 1]), &p).unwrap() - f).abs() < 1e-14);
    assert!((eval(full.get(&[1, 1]), &p).unwrap() - 1.0).abs() < 1e-14);

    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let geo = random_geometry(&mut rng, 3, 2, true).unwrap();
    let full = assemble_full_metric(geo.metric(), geo.nconnection());
    let pts = box_points(&geo, 22, 100);
    let dets = geo.determinants();
    let ev = Evaluator::new(geo.chart(), &dets, &[], &Default::default()).unwrap();
    let vals = values(&geo, &[&full], &pts);
    for (pt, v) in pts.iter().zip(&vals) {
        let mat: Vec<Vec<f64>> = v.chunks(5).map(<[f64]>::to_vec).collect();
        let want: f64 = ev.eval(pt).unwrap().iter().product();
        assert!(rel_dev(linalg::det_f64(mat), want, 1e-30) < 1e-10);
    }
}

#[test]
fn flat_model_has_no_geometry() {
    let chart = SplitChart::new(["x1", "x2"], ["y1", "y2"]).unwrap();
    let geo = NGeometry::new(
        chart,
        DMetric::diagonal(vec![Expr::constant(2.0), Expr::one()], vec![Expr::one(); 2]),
        NConnection::zero(2, 2),
    )
    .unwrap();
    assert!(levi_civita(&geo).field().is_structurally_zero());
    let c = canonical_dconnection(&geo);
    assert!(c.blocks().iter().all(|b| b.is_structurally_zero()));
    let r = curvature(&geo, &c.to_connection());
    assert!(r.is_structurally_zero());
    let ric = ricci(&r);
    let s = scalar(&geo, &ric);
    assert!(s.is_zero());
    assert!(einstein(&geo, &ric, &s).is_structurally_zero());
}

#[test]
fn levi_civita_is_torsion_free_and_metric() {
    for seed in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let geo = random_geometry(&mut rng, 2, 2, true).unwrap();
        let lc = levi_civita(&geo);
        let t = torsion(&geo, &lc);
        let q = nonmetricity(&geo, &lc);
        let pts = box_points(&geo, 200 + seed, 100);
        assert!(max_abs(&values(&geo, &[&t], &pts)) < 1e-12);
        assert!(max_abs(&values(&geo, &[&q], &pts)) < 1e-10);
    }
}

#[test]
fn canonical_paths_agree_and_satisfy_the_conditions() {
    for seed in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
        let geo = random_geometry(&mut rng, 3, 2, true).unwrap();
        let b = canonical_dconnection(&geo);
        let a = canonical_dconnection_via_levi_civita(&geo);
        let pts = box_points(&geo, 400 + seed, 50);
        let va = values(&geo, &a.blocks(), &pts);
        let vb = values(&geo, &b.blocks(), &pts);
        for (ra, rb) in va.iter().zip(&vb) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() < 1e-9, "{x} vs {y}");
            }
        }
        let conn = b.to_connection();
        let q = nonmetricity(&geo, &conn);
        assert!(max_abs(&values(&geo, &[&q], &pts)) < 1e-10);
        let dt = dtorsion(&geo, &b);
        assert!(max_abs(&values(&geo, &[&dt.hjk, &dt.abc], &pts)) < 1e-12);
        // The mixed torsion blocks do not vanish for Ω ≠ 0.
        assert!(max_abs(&values(&geo, &[&dt.hja, &dt.aji, &dt.abi], &pts)) > 1e-3);
    }
}

#[test]
fn torsion_blocks_match_generic_torsion() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let geo = random_geometry(&mut rng, 2, 2, true).unwrap();
    let c = canonical_dconnection(&geo);
    let t = torsion(&geo, &c.to_connection());
    let dt = dtorsion(&geo, &c);
    let pts = box_points(&geo, 78, 30);
    let vt = values(&geo, &[&t], &pts);
    let d = geo.dim();
    for (b, block) in dt.blocks().iter().enumerate() {
        let vb = values(&geo, &[block], &pts);
        for (row_t, row_b) in vt.iter().zip(&vb) {
            for (k, v) in row_b.iter().enumerate() {
                let [x, y, z] = dt.full_index(b, &block.unflatten(k));
                let g = row_t[x * d * d + y * d + z];
                assert!((g - v).abs() < 1e-12, "block {b} {}", block.key(&block.unflatten(k)));
            }
        }
    }
    // T̂^a_{ji} = Ω^a_{ji} structurally.
    for (ix, e) in dt.aji.iter() {
        let n = geo.n();
        let full = t.get(&[n + ix[0], ix[1], ix[2]]);
        assert_eq!(simplify(full), simplify(e));
    }
}

#[test]
fn curvature_blocks_match_generic_curvature() {
    for seed in 0..2 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let geo = random_geometry(&mut rng, 2, 2, true).unwrap();
        let c = canonical_dconnection(&geo);
        let r = curvature(&geo, &c.to_connection());
        let dc = dcurvature(&geo, &c);
        let pts = box_points(&geo, 600 + seed, 40);
        let vr = values(&geo, &[&r], &pts);
        let d = geo.dim();
        for (b, block) in dc.blocks().iter().enumerate() {
            let vb = values(&geo, &[block], &pts);
            for (row_r, row_b) in vr.iter().zip(&vb) {
                for (k, v) in row_b.iter().enumerate() {
                    let [w, x, y, z] = dc.full_index(b, &block.unflatten(k));
                    let g = row_r[((w * d + x) * d + y) * d + z];
                    assert!(rel_dev(g, *v, 1.0) < 1e-8, "block {b}: {g} vs {v}");
                }
            }
        }
        let ric_a = ricci(&r);
        let ric_b = ricci_from_blocks(&dc);
        let va = values(&geo, &[&ric_a], &pts);
        let vb = values(&geo, &[&ric_b], &pts);
        for (x, y) in va.iter().flatten().zip(vb.iter().flatten()) {
            assert!(rel_dev(*x, *y, 1.0) < 1e-8);
        }
    }
}

#[test]
fn conformal_two_dimensional_block() {
    let chart = SplitChart::five_dimensional();
    let p = |s| parse(s, &chart).unwrap();
    let geo = NGeometry::new(
        chart.clone(),
        DMetric::diagonal(
            vec![p("1"), p("exp(x2^2 + x3^2)"), p("exp(x2^2 + x3^2)")],
            vec![p("1"), p("1")],
        ),
        NConnection::zero(3, 2),
    )
    .unwrap();
    let c = canonical_dconnection(&geo);
    let ric = ricci(&curvature(&geo, &c.to_connection()));
    let mixed = einstein_mixed(&geo, &ric);
    let ev = Evaluator::for_fields(&chart, &[&mixed], &[]).unwrap();
    let v = ev.eval(&[0.0; 5]).unwrap();
    // R²₂ = −½ Δψ e^{−ψ} = −2 at the origin
    assert!((v[5 + 1] + 2.0).abs() < 1e-12, "{}", v[6]);
    assert!((v[2 * 5 + 2] + 2.0).abs() < 1e-12);
}

#[test]
fn curvature_is_antisymmetric_in_last_pair() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let geo = random_geometry(&mut rng, 2, 1, true).unwrap();
    let r = curvature(&geo, &levi_civita(&geo));
    assert!(r.check_symmetries().is_ok());
}

#[test]
fn einstein_trace_and_scalar_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let geo = random_geometry(&mut rng, 2, 2, true).unwrap();
    let c = canonical_dconnection(&geo);
    let ric = ricci(&curvature(&geo, &c.to_connection()));
    let s = scalar(&geo, &ric);
    let s2 = scalar_split(&geo, &ric);
    let g = einstein(&geo, &ric, &s);
    let tr = scalar(&geo, &g);
    let d = geo.dim() as f64;
    let ev = Evaluator::new(geo.chart(), &[s, s2, tr], &[], &Default::default()).unwrap();
    for pt in box_points(&geo, 32, 100) {
        let v = ev.eval(&pt).unwrap();
        assert!((v[0] - v[1]).abs() <= 1e-12 * v[0].abs().max(1.0));
        assert!((v[2] - (1.0 - d / 2.0) * v[0]).abs() <= 1e-10 * v[0].abs().max(1.0));
    }
}

#[test]
fn product_metric_connections_coincide() {
    let chart = SplitChart::new(["x1", "x2"], ["y1", "y2"]).unwrap();
    let p = |s| parse(s, &chart).unwrap();
    let geo = NGeometry::new(
        chart.clone(),
        DMetric::new(
            vec![vec![p("2 + sin(x1)"), p("0.3*x2")], vec![p("0.3*x2"), p("3 + x1^2")]],
            vec![vec![p("1 + y2^2"), p("0.2*y1")], vec![p("0.2*y1"), p("exp(y1)")]],
        )
        .unwrap(),
        NConnection::zero(2, 2),
    )
    .unwrap();
    let lc = levi_civita(&geo);
    let c = canonical_dconnection(&geo).to_connection();
    let ga = {
        let r = ricci(&curvature(&geo, &lc));
        let s = scalar(&geo, &r);
        einstein(&geo, &r, &s)
    };
    let gb = {
        let r = ricci(&curvature(&geo, &c));
        let s = scalar(&geo, &r);
        einstein(&geo, &r, &s)
    };
    let pts = box_points(&geo, 40, 50);
    let va = values(&geo, &[lc.field(), &ga], &pts);
    let vb = values(&geo, &[c.field(), &gb], &pts);
    for (x, y) in va.iter().flatten().zip(vb.iter().flatten()) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn mismatched_inputs_are_rejected() {
    let chart = SplitChart::new(["x"], ["y"]).unwrap();
    let bad = DMetric::diagonal(vec![Expr::one(), Expr::one()], vec![Expr::one()]);
    assert!(NGeometry::new(chart.clone(), bad, NConnection::zero(1, 1)).is_err());
    let stray = DMetric::diagonal(vec![Expr::coord("z")], vec![Expr::one()]);
    assert!(NGeometry::new(chart, stray, NConnection::zero(1, 1)).is_err());
    let asym = DMetric::new(
        vec![vec![Expr::one(), Expr::coord("x")], vec![Expr::zero(), Expr::one()]],
        vec![vec![Expr::one()]],
    );
    assert!(matches!(asym, Err(GeometryError::Symmetry(_))));
}

#[test]
fn warped_metric_connections_differ() {
    // h depending on x leaves the Levi-Civita Γ^i_{ab} = −½ g^{ij} ∂_j h_{ab}
    let geo = geometry_1d("1", "1 + x^2", "0");
    let lc = levi_civita(&geo);
    let p = Point::new().with("x", 1.0).with("y", 0.0);
    assert!((eval(lc.get(0, 1, 1), &p).unwrap() + 1.0).abs() < 1e-14);
    assert!(canonical_dconnection(&geo).to_connection().get(0, 1, 1).is_zero());
}
