use proptest::prelude::*;
use proptest::strategy::ValueTree;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nconn::expr::{diff, eval, parse, simplify, BinaryOp, EvalError, Expr, Node, Point, Scope, UnaryOp};
use nconn::geometry::{elongated_diff, NConnection, SplitChart};
use nconn::random::poly;

const COORDS: [&str; 3] = ["x", "y", "z"];
const K: f64 = 0.7;

fn scope() -> Scope {
    Scope::new(COORDS, ["k"])
}

fn point(c: &[f64]) -> Point {
    let mut p = Point::new().with_param("k", K);
    for (n, v) in COORDS.iter().zip(c) {
        p.set(n, *v);
    }
    p
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-3i32..=3, 0u8..4).prop_map(|(a, b)| Expr::constant(a as f64 + b as f64 * 0.25)),
        prop::sample::select(COORDS.to_vec()).prop_map(Expr::coord),
        Just(Expr::param("k")),
    ]
}

fn tree() -> impl Strategy<Value = Expr> {
    let unary = prop::sample::select(vec![
        UnaryOp::Neg,
        UnaryOp::Sin,
        UnaryOp::Cos,
        UnaryOp::Exp,
        UnaryOp::Ln,
        UnaryOp::Sqrt,
        UnaryOp::Abs,
    ]);
    let binary = prop::sample::select(vec![
        BinaryOp::Add,
        BinaryOp::Sub,
        BinaryOp::Mul,
        BinaryOp::Div,
        BinaryOp::Pow,
    ]);
    leaf().prop_recursive(4, 24, 2, move |inner| {
        prop_oneof![
            (unary.clone(), inner.clone()).prop_map(|(op, a)| Expr::unary(op, &a)),
            (binary.clone(), inner.clone(), inner).prop_map(|(op, a, b)| Expr::binary(op, &a, &b)),
        ]
    })
}

fn coords() -> impl Strategy<Value = [f64; 3]> {
    [-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64]
}

/// Value where finite and moderate; `None` otherwise.
fn defined(e: &Expr, c: &[f64]) -> Option<f64> {
    eval(e, &point(c)).ok().filter(|v| v.is_finite() && v.abs() < 1e6)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Central difference with one Richardson step.
fn fd(e: &Expr, c: &[f64; 3], k: usize, h: f64) -> Option<f64> {
    let at = |s: f64| {
        let mut q = *c;
        q[k] += s;
        defined(e, &q)
    };
    let d1 = (at(h)? - at(-h)?) / (2.0 * h);
    let d2 = (at(h / 2.0)? - at(-h / 2.0)?) / h;
    Some((4.0 * d2 - d1) / 3.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn simplify_preserves_value(e in tree(), c in coords()) {
        let Some(a) = defined(&e, &c) else { return Ok(()) };
        let b = eval(&simplify(&e), &point(&c));
        prop_assert!(matches!(b, Ok(b) if close(a, b, 1e-12)), "{e}: {a} vs {b:?}");
    }

    #[test]
    fn print_parse_round_trip(e in tree()) {
        let text = e.to_string();
        let back = parse(&text, &scope()).unwrap();
        prop_assert_eq!(&back, &e, "{}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn diff_is_closed_and_linear(a in tree(), b in tree(), c in coords()) {
        let sum = &a + &b;
        if matches!(sum.node(), Node::Binary(BinaryOp::Add, ..)) {
            prop_assert_eq!(diff(&sum, "x"), diff(&a, "x") + diff(&b, "x"));
        }
        let prod = &a * &b;
        if matches!(prod.node(), Node::Binary(BinaryOp::Mul, ..)) {
            prop_assert_eq!(diff(&prod, "x"), diff(&a, "x") * &b + &a * diff(&b, "x"));
        }
        let lhs = defined(&diff(&prod, "y"), &c);
        let rhs = defined(&(diff(&a, "y") * &b + &a * diff(&b, "y")), &c);
        if let (Some(l), Some(r)) = (lhs, rhs) {
            prop_assert!(close(l, r, 1e-10), "{l} vs {r}");
        }
    }

    #[test]
    fn mixed_partials_commute(e in tree(), c in coords()) {
        let xy = diff(&diff(&e, "x"), "y");
        let yx = diff(&diff(&e, "y"), "x");
        if let (Some(a), Some(b)) = (defined(&xy, &c), defined(&yx, &c)) {
            prop_assert!(close(a, b, 1e-10), "{e}: {a} vs {b}");
        }
    }

    #[test]
    fn elongated_diff_without_n_is_diff(e in tree()) {
        let chart = SplitChart::new(["x", "y"], ["z"]).unwrap();
        let zero = NConnection::zero(2, 1);
        for i in 0..2 {
            let lhs = simplify(&elongated_diff(&e, i, &chart, &zero));
            prop_assert_eq!(lhs, simplify(&diff(&e, COORDS[i])));
        }
    }
}

/// Smooth trees without domain restrictions, for the derivative oracle.
fn smooth<R: Rng>(rng: &mut R, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..3) {
            0 => Expr::constant(rng.gen_range(-2.0..2.0)),
            _ => Expr::coord(COORDS[rng.gen_range(0..3)]),
        };
    }
    let a = smooth(rng, depth - 1);
    match rng.gen_range(0..6) {
        0 => a.sin(),
        1 => (a * 0.5).exp(),
        2 => (Expr::one() + &a * &a).ln(),
        3 => a + smooth(rng, depth - 1),
        4 => a * smooth(rng, depth - 1),
        _ => a / (Expr::constant(2.0) + smooth(rng, depth - 1).cos()),
    }
}

#[test]
fn derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 200 {
        let e = smooth(&mut rng, 4);
        let c = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let k = rng.gen_range(0..3);
        let d = eval(&diff(&e, COORDS[k]), &point(&c)).unwrap();
        let f = fd(&e, &c, k, 1e-3).unwrap();
        assert!((d - f).abs() <= 1e-6 * d.abs().max(1.0), "{e}: {d} vs {f}");
        checked += 1;
    }
}

#[test]
fn simplify_agrees_on_ten_thousand_pairs() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strat = (tree(), coords());
    let mut compared = 0;
    for _ in 0..10_000 {
        let (e, c) = strat.new_tree(&mut runner).unwrap().current();
        let Some(a) = defined(&e, &c) else { continue };
        let b = eval(&simplify(&e), &point(&c)).unwrap();
        assert!(close(a, b, 1e-12), "{e}: {a} vs {b}");
        compared += 1;
    }
    assert!(compared > 5_000, "{compared}");
}

#[test]
fn elongated_diff_matches_directional_difference() {
    let chart = SplitChart::new(["x", "y"], ["z"]).unwrap();
    let names: Vec<String> = COORDS.iter().map(|s| s.to_string()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let e = poly(&mut rng, &names, 1.0) * poly(&mut rng, &names, 1.0);
        let n = NConnection::from_rows(vec![vec![poly(&mut rng, &names, 1.0)], vec![poly(&mut rng, &names, 1.0)]])
            .unwrap();
        let c = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        for i in 0..2 {
            let d = eval(&elongated_diff(&e, i, &chart, &n), &point(&c)).unwrap();
            // e_i = ∂_i − N_i ∂_z as a numeric direction
            let ni = eval(n.get(i, 0), &point(&c)).unwrap();
            let mut dir = [0.0; 3];
            dir[i] = 1.0;
            dir[2] = -ni;
            let h = 1e-4;
            let at = |s: f64| eval(&e, &point(&[c[0] + s * dir[0], c[1] + s * dir[1], c[2] + s * dir[2]])).unwrap();
            let f = (at(h) - at(-h)) / (2.0 * h);
            assert!((d - f).abs() <= 1e-6 * d.abs().max(1.0), "{d} vs {f}");
        }
    }
}

#[test]
fn documented_examples() {
    let s = scope();
    let p = |e: &str, c: [f64; 3]| eval(&parse(e, &s).unwrap(), &point(&c)).unwrap();
    assert_eq!(p("x^2 + sin(z)", [2.0, 0.0, 0.0]), 4.0);
    assert!((p("exp(2*z)", [0.0, 0.0, 0.5]) - std::f64::consts::E).abs() < 1e-15);
    assert_eq!(parse("x +", &s).unwrap_err().offset(), 3);
    assert_eq!(diff(&parse("z^3", &s).unwrap(), "z").to_string(), "3*z^2");
    assert_eq!(diff(&parse("sin(x)*y", &s).unwrap(), "y"), parse("sin(x)", &s).unwrap());
    assert_eq!(simplify(&parse("0*sin(z) + x*1", &s).unwrap()), parse("x", &s).unwrap());
    let pole = eval(&parse("1/z", &s).unwrap(), &point(&[0.0; 3]));
    assert_eq!(pole, Err(EvalError::Domain { node: "1/z".into() }));

    let chart = SplitChart::new(["x1", "x2"], ["y5"]).unwrap();
    let e = parse("y5", &chart).unwrap();
    let n = NConnection::from_rows(vec![vec![Expr::zero()], vec![parse("x1", &chart).unwrap()]]).unwrap();
    assert_eq!(simplify(&elongated_diff(&e, 1, &chart, &n)), parse("-x1", &chart).unwrap());
}
