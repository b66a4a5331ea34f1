//! Oracles shared by the integration tests. Nothing here calls the jet or
//! scheme code: coefficients come from exact rational arithmetic and
//! Jacobians from differentiating monomials by hand.
#![allow(dead_code)]

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use invseries::numerics::{Matrix, Precision, Scalar, Vector};
use invseries::{parse_problem, Problem};

/// Difference columns of the order 2-5 tables, truncated to 10 digits.
pub const TABLE_STEPS: [&[&str]; 4] = [
    &[
        "1.875e0",
        "8.272058823e-1",
        "2.636279370e-1",
        "3.360179943e-2",
        "5.642220263e-4",
        "1.591732221e-7",
        "1.266805733e-14",
        "8.023983829e-29",
        "3.219215824e-57",
        "5.181675262e-114",
        "1.342487926e-227",
        "9.011369159e-455",
        "4.060238706e-909",
    ],
    &[
        "2.314453125e0",
        "6.346101778e-1",
        "5.087759339e-2",
        "5.910371143e-5",
        "1.032182555e-13",
        "5.498440738e-40",
        "8.311676855e-119",
        "2.871018262e-355",
    ],
    &[
        "2.520446777e0",
        "4.712251724e-1",
        "8.328047301e-3",
        "2.918053615e-9",
        "4.531615792e-35",
        "2.635677954e-138",
        "3.016125394e-551",
    ],
    &[
        "2.641146183e0",
        "3.576931213e-1",
        "1.160695685e-3",
        "1.832656852e-15",
        "1.808896959e-74",
        "1.694639002e-369",
    ],
];

/// Exact decimal expansion of a rational whose denominator is `2^a 5^b`.
pub fn terminating_decimal(q: &BigRational) -> String {
    let mut num = q.numer().abs();
    let mut den = q.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let ten = BigInt::from(10);
    let mut scale = 0u32;
    while !den.is_one() {
        if (&den % &two).is_zero() {
            den /= &two;
            num *= &five;
        } else if (&den % &five).is_zero() {
            den /= &five;
            num *= &two;
        } else {
            panic!("{q} has no terminating decimal expansion");
        }
        scale += 1;
    }
    let sign = if q.is_negative() { "-" } else { "" };
    let mut digits = num.to_string();
    if scale == 0 {
        return format!("{sign}{digits}");
    }
    let scale = scale as usize;
    if digits.len() <= scale {
        digits = "0".repeat(scale - digits.len() + 1) + &digits;
    }
    let (int, frac) = digits.split_at(digits.len() - scale);
    let _ = &ten;
    format!("{sign}{int}.{frac}")
}

/// `binom(1/2, p)`.
pub fn half_binomial(p: usize) -> BigRational {
    let half = BigRational::new(1.into(), 2.into());
    let mut acc = BigRational::one();
    for i in 0..p {
        acc = acc * (&half - BigRational::from_integer(i.into()))
            / BigRational::from_integer((i + 1).into());
    }
    acc
}

/// p-th Taylor coefficient of `√(1+f)` at `f = 15`, i.e. `binom(1/2,p)·4/16^p`.
pub fn sqrt_inverse_rational(p: usize) -> BigRational {
    half_binomial(p) * BigRational::from_integer(4.into())
        / BigRational::from_integer(BigInt::from(16).pow(p as u32))
}

pub fn sqrt_inverse_coefficient(p: usize, prec: Precision) -> Scalar {
    prec.parse(&terminating_decimal(&sqrt_inverse_rational(p)))
        .unwrap()
}

/// p-th Taylor coefficient of `log(1+f)` at `f = 0`: `(-1)^(p-1)/p`.
pub fn log_inverse_rational(p: usize) -> BigRational {
    let sign: i64 = if p % 2 == 1 { 1 } else { -1 };
    BigRational::new(sign.into(), (p as i64).into())
}

pub fn rational_to_scalar(q: &BigRational, prec: Precision) -> Scalar {
    &prec.parse(&q.numer().to_string()).unwrap() / &prec.parse(&q.denom().to_string()).unwrap()
}

/// A polynomial system kept as explicit monomials next to its parsed form.
pub struct PolySystem {
    /// Per equation: `(coefficient, exponents)`.
    pub equations: Vec<Vec<(i64, Vec<u32>)>>,
    pub problem: Problem,
}

impl PolySystem {
    fn monomial(x: &Vector, exps: &[u32]) -> Scalar {
        let prec = x[0].precision();
        exps.iter()
            .enumerate()
            .fold(prec.one(), |acc, (i, &e)| &acc * &x[i].powi(e))
    }

    pub fn evaluate(&self, x: &Vector) -> Vector {
        let prec = x[0].precision();
        self.equations
            .iter()
            .map(|terms| {
                terms.iter().fold(prec.zero(), |acc, (c, e)| {
                    &acc + &(&prec.from_i64(*c) * &Self::monomial(x, e))
                })
            })
            .collect()
    }

    /// `J[i][j] = ∂f_i/∂x_j`, differentiated term by term.
    pub fn jacobian(&self, x: &Vector) -> Matrix {
        let prec = x[0].precision();
        let n = x.dim();
        let rows = self
            .equations
            .iter()
            .map(|terms| {
                (0..n)
                    .map(|j| {
                        terms.iter().fold(prec.zero(), |acc, (c, e)| {
                            if e[j] == 0 {
                                return acc;
                            }
                            let mut d = e.clone();
                            d[j] -= 1;
                            let coef = prec.from_i64(*c * e[j] as i64);
                            &acc + &(&coef * &Self::monomial(x, &d))
                        })
                    })
                    .collect()
            })
            .collect();
        Matrix::from_rows(rows).unwrap()
    }
}

/// Random system of `nvars` polynomials of total degree at most 3 with small
/// integer coefficients; each equation has a linear term in its own variable.
/// The start point has two-decimal coordinates in `[-2, 2]`.
pub fn random_polynomial_system(seed: u64, nvars: usize, prec: Precision) -> PolySystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (1..=nvars).map(|i| format!("x{i}")).collect();
    let mut equations = Vec::new();
    let mut text = format!("vars: {}\n", names.join(" "));
    for i in 0..nvars {
        let mut terms: Vec<(i64, Vec<u32>)> = Vec::new();
        let mut lin = vec![0u32; nvars];
        lin[i] = 1;
        terms.push((rng.gen_range(1..=5), lin));
        for _ in 0..rng.gen_range(1..=4) {
            let mut exps = vec![0u32; nvars];
            let degree = rng.gen_range(0..=3);
            for _ in 0..degree {
                exps[rng.gen_range(0..nvars)] += 1;
            }
            let c = rng.gen_range(-5..=5i64);
            if c != 0 {
                terms.push((c, exps));
            }
        }
        let rendered: Vec<String> = terms
            .iter()
            .map(|(c, e)| {
                let mut factors = vec![format!("({c})")];
                for (j, &p) in e.iter().enumerate() {
                    match p {
                        0 => {}
                        1 => factors.push(names[j].clone()),
                        _ => factors.push(format!("{}^{p}", names[j])),
                    }
                }
                factors.join("*")
            })
            .collect();
        text.push_str(&format!("eq: {}\n", rendered.join(" + ")));
        equations.push(terms);
    }
    let start: Vec<String> = (0..nvars)
        .map(|_| format!("{:.2}", rng.gen_range(-200..=200) as f64 / 100.0))
        .collect();
    text.push_str(&format!("start: {}\n", start.join(" ")));
    let problem = parse_problem(&text, prec).unwrap_or_else(|e| panic!("{text}: {e}"));
    PolySystem { equations, problem }
}
