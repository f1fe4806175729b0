use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nconn::ansatz5d::*;
use nconn::expr::{parse, Expr};
use nconn::random::{random_ansatz, wave};
use nconn::sample::{random_points, Evaluator};

fn ex(s: &str) -> Expr {
    parse(s, &Ansatz5D::chart()).unwrap()
}

fn ranges() -> Vec<(f64, f64)> {
    vec![(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)]
}

fn at(e: &[Expr], p: &[f64]) -> Vec<f64> {
    let ev = Evaluator::new(&Ansatz5D::chart(), e, &[], &Default::default()).unwrap();
    ev.eval(p).unwrap()
}

#[test]
fn build_places_functions() {
    let mut a = Ansatz5D::flat();
    a.g2 = ex("exp(x2*x3)");
    a.h5 = ex("v^2");
    a.w[1] = ex("x3");
    a.n[0] = ex("v");
    let geo = build(&a).unwrap();
    assert_eq!(geo.metric().g()[1][1], a.g2);
    assert_eq!(geo.metric().h()[1][1], a.h5);
    assert_eq!(geo.nconnection().get(1, 0), &a.w[1]);
    assert_eq!(geo.nconnection().get(0, 1), &a.n[0]);
}

#[test]
fn validation_rejects_bad_dependence() {
    let mut a = Ansatz5D::flat();
    a.g2 = ex("v");
    assert!(matches!(build(&a), Err(AnsatzError::Dependence { .. })));
    let mut a = Ansatz5D::flat();
    a.w[0] = ex("y5");
    assert!(build(&a).is_err());
    let mut a = Ansatz5D::flat();
    a.g1 = 2.0;
    assert!(matches!(a.validate(), Err(AnsatzError::Signature(_))));
}

#[test]
fn flat_ansatz_has_no_curvature() {
    let geo = build(&Ansatz5D::flat()).unwrap();
    let kt = kernel_tensors(&geo);
    assert!(kt.ricci.is_structurally_zero());
    let cf = ricci_closed_form(&Ansatz5D::flat(), ClosedFormVariant::KernelConsistent);
    assert!(cf.named().iter().all(|(_, e)| e.is_zero()));
}

#[test]
fn conformal_h_block() {
    let mut a = Ansatz5D::flat();
    a.g2 = ex("exp(x2^2 + x3^2)");
    a.g3 = a.g2.clone();
    let cf = ricci_closed_form(&a, ClosedFormVariant::KernelConsistent);
    let v = at(&[cf.r22.clone(), cf.r44.clone()], &[0.0; 5]);
    assert!((v[0] + 2.0).abs() < 1e-12);
    assert_eq!(v[1], 0.0);
    // −½(ψ•• + ψ″)e^{−ψ} elsewhere
    let p = [0.0, 0.3, -0.4, 0.0, 0.0];
    let expect = -0.5 * 4.0 * (-(0.09f64 + 0.16)).exp();
    assert!((at(&[cf.r22], &p)[0] - expect).abs() < 1e-12);
}

#[test]
fn exponential_v_block() {
    let mut a = Ansatz5D::flat();
    a.h5 = ex("exp(2*v)");
    let cf = ricci_closed_form(&a, ClosedFormVariant::KernelConsistent);
    for p in random_points(&mut ChaCha8Rng::seed_from_u64(1), &ranges(), 10) {
        assert!((at(&[cf.r44.clone()], &p)[0] + 1.0).abs() < 1e-12);
    }
    let kt = kernel_tensors(&build(&a).unwrap());
    let p = [0.1, 0.2, 0.3, 0.4, 0.5];
    let r = at(&[kt.ricci_mixed.get(&[3, 3]).clone(), kt.ricci_mixed.get(&[4, 4]).clone()], &p);
    assert!((r[0] + 1.0).abs() < 1e-12 && (r[1] + 1.0).abs() < 1e-12);
}

#[test]
fn cubic_h5_alpha_beta_w() {
    let mut a = Ansatz5D::flat();
    a.h5 = ex("v^3 + x2");
    a.w[1] = Expr::constant(-0.2);
    let cf = ricci_closed_form(&a, ClosedFormVariant::KernelConsistent);
    let p = [0.0, 1.0, 0.0, 1.0, 0.0];
    let v = at(&[cf.beta.clone(), cf.alpha[1].clone(), cf.r4i[1].clone()], &p);
    assert!((v[0] - 3.75).abs() < 1e-12);
    assert!((v[1] + 0.75).abs() < 1e-12);
    assert!(v[2].abs() < 1e-12);
    let kt = kernel_tensors(&build(&a).unwrap());
    assert!(at(&[kt.ricci.get(&[V, X2]).clone()], &p)[0].abs() < 1e-12);

    // The printed sign convention would need w₂ = +0.2.
    a.w[1] = Expr::constant(0.2);
    let printed = ricci_closed_form(&a, ClosedFormVariant::AsPrinted);
    assert!(at(&[printed.r4i[1].clone()], &p)[0].abs() < 1e-12);
    assert!(at(&[kt_r42(&a)], &p)[0].abs() > 0.1);
}

fn kt_r42(a: &Ansatz5D) -> Expr {
    kernel_tensors(&build(a).unwrap()).ricci.get(&[V, X2]).clone()
}

#[test]
fn alpha_vanishes_without_x_dependence() {
    let mut a = Ansatz5D::flat();
    a.h4 = ex("exp(v)");
    a.h5 = ex("v^2 + 1");
    let (alpha, beta) = alpha_beta(&a);
    assert!(alpha.iter().all(Expr::is_zero));
    assert!(!beta.is_zero());
}

#[test]
fn random_ansatze_match_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for _ in 0..3 {
        let a = random_ansatz(&mut rng);
        let pts = random_points(&mut rng, &ranges(), 20);
        let r = closed_form_vs_kernel(&a, &pts, ClosedFormVariant::KernelConsistent, 1e-30).unwrap();
        assert!(r.skipped.is_empty(), "{:?}", r.skipped);
        assert!(r.max_rel < 1e-8, "{:?}", r.components);
        assert!(r.zero_pattern_max < 1e-10, "{}", r.zero_pattern_max);
    }
}

#[test]
fn printed_variant_disagrees_with_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let a = random_ansatz(&mut rng);
    let pts = random_points(&mut rng, &ranges(), 10);
    let r = closed_form_vs_kernel(&a, &pts, ClosedFormVariant::AsPrinted, 1e-30).unwrap();
    assert!(r.max_rel > 1e-3);
}

#[test]
fn vanishing_h5_star_is_skipped() {
    let mut a = Ansatz5D::flat();
    a.h5 = ex("2 + v^2");
    let pts = vec![vec![0.0, 0.1, 0.2, 0.0, 0.0], vec![0.0, 0.1, 0.2, 0.5, 0.0]];
    let r = closed_form_vs_kernel(&a, &pts, ClosedFormVariant::KernelConsistent, 1e-30).unwrap();
    assert_eq!(r.skipped.len(), 1);
    assert_eq!(r.skipped[0].0, 0);
    assert!(r.max_rel < 1e-8);
}

#[test]
fn r22_ignores_w_and_n() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let a = random_ansatz(&mut rng);
    let mut b = a.clone();
    let hv: Vec<String> = ["x2", "x3", "v"].map(String::from).to_vec();
    for i in 0..3 {
        b.w[i] = &b.w[i] + wave(&mut rng, &hv, 0.5);
        b.n[i] = &b.n[i] + wave(&mut rng, &hv, 0.5);
    }
    let ka = kernel_tensors(&build(&a).unwrap()).ricci_mixed.get(&[1, 1]).clone();
    let kb = kernel_tensors(&build(&b).unwrap()).ricci_mixed.get(&[1, 1]).clone();
    for p in random_points(&mut rng, &ranges(), 20) {
        let v = at(&[ka.clone(), kb.clone()], &p);
        assert!((v[0] - v[1]).abs() < 1e-12);
    }
}

#[test]
fn einstein_structure_and_sources() {
    let mut a = Ansatz5D::flat();
    a.h5 = ex("exp(2*v)");
    let pts = random_points(&mut ChaCha8Rng::seed_from_u64(5), &ranges(), 20);
    let s = SourceSpec {
        upsilon2: Expr::one(),
        upsilon4: Expr::zero(),
        k: 1.0,
    };
    let r = source_compatibility(&a, &s, &pts).unwrap();
    assert!(r.max_structure() < 1e-12);
    assert!(r.max_equation() < 1e-12, "{:?}", r.equations);
    let r = source_compatibility(&a, &SourceSpec::vacuum(), &pts).unwrap();
    assert!(r.max_equation() > 0.5);
}

#[test]
fn vacuum_family_solves_equations() {
    let mut a = Ansatz5D::flat();
    a.g2 = ex("exp(x2*x3)");
    a.g3 = a.g2.clone();
    a.h5 = ex("v^2");
    a.n = [ex("1 - 1/(2*v^2)"), ex("x2 - x3/(2*v^2)"), Expr::zero()];
    let pts = random_points(&mut ChaCha8Rng::seed_from_u64(6), &[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (0.5, 2.0), (-1.0, 1.0)], 30);
    let r = source_compatibility(&a, &SourceSpec::vacuum(), &pts).unwrap();
    assert_eq!(r.domain_errors, 0);
    assert!(r.max_equation() < 1e-10, "{:?}", r.equations);
}

#[test]
fn source_upsilon4_must_not_depend_on_v() {
    let s = SourceSpec {
        upsilon2: Expr::zero(),
        upsilon4: ex("v"),
        k: 1.0,
    };
    let r = source_compatibility(&Ansatz5D::flat(), &s, &[]);
    assert!(matches!(r, Err(AnsatzError::Dependence { .. })));
}

#[test]
fn random_structure_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let a = random_ansatz(&mut rng);
    let pts = random_points(&mut rng, &ranges(), 20);
    let r = source_compatibility(&a, &SourceSpec::vacuum(), &pts).unwrap();
    assert!(r.max_structure() < 1e-9, "{:?}", r.structure);
}
