//! Property tests for jets, expressions and scheme tensors.

use proptest::prelude::*;

use invseries::expr::{BinOp, Expr, Func};
use invseries::numerics::{Precision, Rounding, Vector};
use invseries::scheme::{build_terms, SchemeSpec};
use invseries::taylor::{coefficient_count, Elementary, TaylorPoly};
use invseries::{parse_problem, Problem};

const DIGITS: u32 = 60;

fn prec() -> Precision {
    Precision::new(DIGITS).unwrap()
}

/// `‖a - b‖ <= 10^(slack - digits) · max(1, ‖a‖)` on coefficients.
fn close(a: &TaylorPoly, b: &TaylorPoly, slack: i64) -> bool {
    let diff = a.sub(b).unwrap().max_abs_coeff();
    let scale = a.max_abs_coeff().max(&prec().one());
    diff <= &prec().epsilon_with_slack(slack) * &scale
}

fn poly(nvars: usize, degree: usize, coeffs: &[i32]) -> TaylorPoly {
    let p = prec();
    let mut out = TaylorPoly::zero(nvars, degree, p);
    let terms: Vec<_> = out.terms().map(|(m, _)| m.clone()).collect();
    let pairs = terms
        .into_iter()
        .zip(coeffs.iter().cycle())
        .map(|(m, &c)| (m, p.from_i64(c as i64)));
    out = TaylorPoly::from_terms(nvars, degree, p, pairs).unwrap();
    out
}

fn poly_strategy() -> impl Strategy<Value = (usize, usize, Vec<i32>, Vec<i32>, Vec<i32>)> {
    (1usize..=3, 0usize..=4).prop_flat_map(|(n, d)| {
        let len = coefficient_count(n, d);
        let c = prop::collection::vec(-9i32..=9, len);
        (Just(n), Just(d), c.clone(), c.clone(), c)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_laws((n, d, ca, cb, cc) in poly_strategy()) {
        let (a, b, c) = (poly(n, d, &ca), poly(n, d, &cb), poly(n, d, &cc));
        prop_assert!(close(&a.add(&b).unwrap(), &b.add(&a).unwrap(), 5));
        prop_assert!(close(&a.mul(&b).unwrap(), &b.mul(&a).unwrap(), 5));
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 10));
        let dist = a.mul(&b.add(&c).unwrap()).unwrap();
        let expanded = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(close(&dist, &expanded, 10));
        let one = TaylorPoly::constant(prec().one(), n, d);
        prop_assert_eq!(a.mul(&one).unwrap(), a.clone());
        prop_assert!(a.sub(&a).unwrap().max_abs_coeff().is_zero());
    }

    #[test]
    fn leibniz_rule((n, d, ca, cb, _) in poly_strategy(), var in 0usize..3) {
        prop_assume!(d >= 1);
        let var = var % n;
        let (a, b) = (poly(n, d, &ca), poly(n, d, &cb));
        let lhs = a.mul(&b).unwrap().partial(var).unwrap();
        let rhs = a
            .partial(var)
            .unwrap()
            .mul(&b.truncate(d - 1))
            .unwrap()
            .add(&a.truncate(d - 1).mul(&b.partial(var).unwrap()).unwrap())
            .unwrap();
        prop_assert!(close(&lhs, &rhs, 10));
    }

    #[test]
    fn exp_log_round_trip((n, d, ca, _, _) in poly_strategy(), shift in 20i64..40) {
        // positive constant term keeps log in its domain
        let a = poly(n, d, &ca).add_constant(&prec().from_i64(shift));
        let back = a.compose(Elementary::Log).unwrap().compose(Elementary::Exp).unwrap();
        prop_assert!(close(&a, &back, 15));
    }

    #[test]
    fn exp_of_sum((n, d, ca, cb, _) in poly_strategy()) {
        let tenth = prec().parse("0.1").unwrap();
        let (a, b) = (poly(n, d, &ca).scale(&tenth), poly(n, d, &cb).scale(&tenth));
        let lhs = a.add(&b).unwrap().compose(Elementary::Exp).unwrap();
        let rhs = a.compose(Elementary::Exp).unwrap().mul(&b.compose(Elementary::Exp).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 15));
    }

    #[test]
    fn jet_gradient_matches_central_differences(x in -150i64..150, y in -150i64..150) {
        let p = Precision::new(100).unwrap();
        let vars = vec!["x".to_string(), "y".to_string()];
        let e = Expr::parse("sin(x)*exp(y/3) + x^3/(2 + cos(y)) - sqrt(5 + x^2*y^2)", &vars, p).unwrap();
        let point = Vector::new(vec![p.from_i64(x) / p.from_i64(100), p.from_i64(y) / p.from_i64(100)]);
        let jet = e.eval_jet(&point, 1).unwrap();
        let h = p.pow10(-30);
        for i in 0..2 {
            let mut up = point.clone();
            up[i] = &up[i] + &h;
            let mut down = point.clone();
            down[i] = &down[i] - &h;
            let fd = &(&e.eval_scalar(&up).unwrap() - &e.eval_scalar(&down).unwrap()) / &(&h + &h);
            let mut unit = [0u32; 2];
            unit[i] = 1;
            let ad = jet.coeff(&unit).unwrap();
            prop_assert!((&fd - ad).abs() < p.pow10(-50), "d/dx{}: {:?} vs {:?}", i, fd, ad);
        }
    }

    #[test]
    fn scheme_tensors_are_symmetric(x in 5i64..40, y in 5i64..40) {
        let p = prec();
        let problem = parse_problem(
            "vars: a b\neq: a^2*b + sin(b) - 1\neq: exp(a/4) + a*b^3 - 2\nstart: 1 1\n", p,
        ).unwrap();
        let point = Vector::new(vec![p.from_i64(x) / p.from_i64(10), p.from_i64(y) / p.from_i64(10)]);
        let Ok(terms) = build_terms(&problem, &point, SchemeSpec::new(4).unwrap()) else {
            return Ok(());
        };
        for t in &terms[1..] {
            let order = t.order();
            for i in 0..2 {
                for flat in 0..(1usize << order) {
                    let js: Vec<usize> = (0..order).map(|b| (flat >> b) & 1).collect();
                    let mut sorted = js.clone();
                    sorted.sort_unstable();
                    let a = t.value(&[&[i][..], &js].concat()).clone();
                    let b = t.value(&[&[i][..], &sorted].concat()).clone();
                    let scale = a.abs().max(&p.one());
                    prop_assert!((&a - &b).abs() <= &p.epsilon_with_slack(10) * &scale);
                }
            }
        }
    }

    #[test]
    fn relabeling_variables_permutes_tensors(x in 5i64..40, y in 5i64..40) {
        let p = prec();
        let eqs = "eq: a^2*b + sin(b) - 1\neq: exp(a/4) + a*b^3 - 2\n";
        let ab: Problem = parse_problem(&format!("vars: a b\n{eqs}start: 1 1\n"), p).unwrap();
        let ba: Problem = parse_problem(&format!("vars: b a\n{eqs}start: 1 1\n"), p).unwrap();
        let (xa, xb) = (p.from_i64(x) / p.from_i64(10), p.from_i64(y) / p.from_i64(10));
        let spec = SchemeSpec::new(4).unwrap();
        let Ok(t_ab) = build_terms(&ab, &Vector::new(vec![xa.clone(), xb.clone()]), spec) else {
            return Ok(());
        };
        let t_ba = build_terms(&ba, &Vector::new(vec![xb, xa]), spec).unwrap();
        for (u, v) in t_ab.iter().zip(&t_ba) {
            let order = u.order();
            for i in 0..2 {
                for flat in 0..(1usize << order) {
                    let js: Vec<usize> = (0..order).map(|b| (flat >> b) & 1).collect();
                    let a = u.value(&[&[i][..], &js].concat());
                    let b = v.value(&[&[1 - i][..], &js].concat());
                    let scale = a.abs().max(&p.one());
                    prop_assert!((a - b).abs() <= &p.epsilon_with_slack(10) * &scale);
                }
            }
        }
    }

    #[test]
    fn expression_display_round_trips(e in expr_strategy()) {
        let vars = vec!["x".to_string(), "y".to_string()];
        let text = e.display(&vars).to_string();
        let back = Expr::parse(&text, &vars, prec()).unwrap();
        prop_assert_eq!(back, e, "{}", text);
    }

    #[test]
    fn scalar_decimal_round_trip(mantissa in 1u64..u64::MAX, exp in -300i64..300) {
        let p = prec();
        let x = &p.from_u64(mantissa) * &p.pow10(exp);
        let text = x.to_sci(DIGITS as usize + 5, Rounding::Nearest);
        let back = p.parse(&text).unwrap();
        prop_assert!((&back - &x).abs() <= &p.epsilon_with_slack(2) * &x.abs());
    }
}

fn literal(text: &str) -> Expr {
    let vars: Vec<String> = Vec::new();
    Expr::parse(text, &vars, prec()).unwrap()
}

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0usize..2).prop_map(Expr::Var),
        prop::sample::select(vec!["0", "1", "2.5", "10", "0.125", "3e2"]).prop_map(literal),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (
                prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div]),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
            (inner.clone(), 0u32..4).prop_map(|(e, n)| Expr::Pow(Box::new(e), n)),
            (
                prop::sample::select(vec![Func::Exp, Func::Log, Func::Sin, Func::Cos, Func::Sqrt]),
                inner
            )
                .prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
        ]
    })
}
