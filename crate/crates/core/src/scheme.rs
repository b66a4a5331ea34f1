//! Order-k update built from the truncated Taylor series of the local inverse
//! map `g = F⁻¹`.
//!
//! Writing `A¹ = ∂g/∂f = J⁻¹` (as a function of `x`), every higher inverse
//! derivative follows from the chain rule applied to `g_i(F(x)) = x_i`:
//!
//! ```text
//! A^{p+1}[i, j1..jp, r] = Σ_s J⁻¹[s, r] · ∂/∂x_s A^p[i, j1..jp]
//! ```
//!
//! All entries are carried as truncated Taylor polynomials around the current
//! iterate, so the `∂/∂x_s` are exact series derivatives. Each recursion step
//! consumes one degree of the jet budget; `A^m` only needs its constant term.
//! The update is then
//!
//! ```text
//! x⁺_i = x_i + Σ_{p=1..m} (1/p!) · A^p[i, j1..jp] · (-f_{j1}) ··· (-f_{jp})
//! ```
//!
//! which is Newton's method for `m = 1` and the multivariate Halley/Schröder
//! scheme for `m = 2`.

use crate::error::{Error, Result};
use crate::expr::Problem;
use crate::numerics::{lu_invert, Matrix, Scalar, Vector};
use crate::taylor::TaylorPoly;

/// Largest supported convergence order.
pub const MAX_ORDER: usize = 8;
/// Largest supported system size.
pub const MAX_VARS: usize = 8;

/// Target convergence order `k`; the update keeps `k - 1` series terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SchemeSpec {
    order: usize,
}

impl SchemeSpec {
    pub fn new(order: usize) -> Result<Self> {
        if !(2..=MAX_ORDER).contains(&order) {
            return Err(Error::UnsupportedOrder {
                order,
                min: 2,
                max: MAX_ORDER,
            });
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> usize {
        self.order - 1
    }
}

/// `n × n` matrix of jets sharing one shape.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesMatrix {
    n: usize,
    entries: Vec<TaylorPoly>,
}

impl SeriesMatrix {
    pub fn new(n: usize, entries: Vec<TaylorPoly>) -> Result<Self> {
        if entries.len() != n * n || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} jets for a {n}x{n} series matrix",
                entries.len()
            )));
        }
        let (v, d) = (entries[0].nvars(), entries[0].max_degree());
        if entries
            .iter()
            .any(|e| e.nvars() != v || e.max_degree() != d)
        {
            return Err(Error::DimensionMismatch(
                "series matrix entries differ in shape".into(),
            ));
        }
        Ok(Self { n, entries })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> usize {
        self.entries[0].max_degree()
    }

    pub fn get(&self, row: usize, col: usize) -> &TaylorPoly {
        &self.entries[row * self.n + col]
    }

    /// Numeric matrix of constant terms.
    pub fn constant_part(&self) -> Matrix {
        let data = self
            .entries
            .iter()
            .map(|e| e.constant_term().clone())
            .collect();
        Matrix::new(self.n, self.n, data).expect("square by construction")
    }

    pub fn mul(&self, other: &SeriesMatrix) -> Result<SeriesMatrix> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let mut acc = self.get(r, 0).mul(other.get(0, c))?;
                for k in 1..n {
                    acc = acc.add(&self.get(r, k).mul(other.get(k, c))?)?;
                }
                out.push(acc);
            }
        }
        SeriesMatrix::new(n, out)
    }

    pub fn truncate(&self, degree: usize) -> SeriesMatrix {
        SeriesMatrix {
            n: self.n,
            entries: self.entries.iter().map(|e| e.truncate(degree)).collect(),
        }
    }
}

/// One inverse-derivative tensor `A^p`, shape `n^(p+1)`, laid out row-major
/// as `[i, j1, ..., jp]` with the output slot `i` first.
#[derive(Clone, Debug)]
pub struct SchemeTerm {
    p: usize,
    n: usize,
    tensor: Vec<TaylorPoly>,
    value: Vec<Scalar>,
}

impl SchemeTerm {
    fn from_tensor(p: usize, n: usize, tensor: Vec<TaylorPoly>) -> Self {
        let value = tensor.iter().map(|t| t.constant_term().clone()).collect();
        Self {
            p,
            n,
            tensor,
            value,
        }
    }

    pub fn order(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn tensor(&self) -> &[TaylorPoly] {
        &self.tensor
    }

    /// Constant terms of the tensor: the raw mixed partials
    /// `∂^p g_i / ∂f_{j1}...∂f_{jp}` at the expansion point.
    pub fn values(&self) -> &[Scalar] {
        &self.value
    }

    /// Value at `[i, j1, ..., jp]`.
    pub fn value(&self, index: &[usize]) -> &Scalar {
        assert_eq!(index.len(), self.p + 1, "scheme term index rank");
        let flat = index.iter().fold(0, |acc, &k| acc * self.n + k);
        &self.value[flat]
    }

    /// Contracts every f-slot with `v`, giving `A^p[i, ·] v ⊗ ... ⊗ v`.
    pub fn contract(&self, v: &Vector) -> Vector {
        let n = self.n;
        let mut current = self.value.clone();
        for _ in 0..self.p {
            current = current
                .chunks(n)
                .map(|row| {
                    row.iter()
                        .zip(v.iter())
                        .fold(v[0].zero_like(), |acc, (a, b)| acc + a * b)
                })
                .collect();
        }
        Vector::new(current)
    }
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_VARS {
        return Err(Error::TooManyVariables {
            nvars: n,
            max: MAX_VARS,
        });
    }
    Ok(())
}

/// `J(x)` around `point` with entry `(j, i) = ∂f_j/∂x_i`, each a jet of
/// degree `degree`.
pub fn jacobian_series(problem: &Problem, point: &Vector, degree: usize) -> Result<SeriesMatrix> {
    let n = problem.nvars();
    check_size(n)?;
    if point.dim() != n {
        return Err(Error::DimensionMismatch("point length".into()));
    }
    let mut entries = Vec::with_capacity(n * n);
    for f in problem.equations() {
        let jet = f.eval_jet(point, degree + 1)?;
        for i in 0..n {
            entries.push(jet.partial(i)?);
        }
    }
    SeriesMatrix::new(n, entries)
}

/// Truncated series inverse, built degree by degree:
/// `X₀ = J₀⁻¹`, `X_q = -X₀ · Σ_{r=1..q} J_r X_{q-r}`.
pub fn series_matrix_inverse(jac: &SeriesMatrix) -> Result<SeriesMatrix> {
    let n = jac.dim();
    let degree = jac.max_degree();
    let nvars = jac.get(0, 0).nvars();
    let x0 = lu_invert(&jac.constant_part())?;

    let mut x = SeriesMatrix::new(
        n,
        (0..n * n)
            .map(|k| TaylorPoly::constant(x0[(k / n, k % n)].clone(), nvars, degree))
            .collect(),
    )?;
    let x0_series = x.clone();

    for q in 1..=degree {
        // X currently holds degrees < q, so the degree-q part of J·X is
        // Σ_{r>=1} J_r X_{q-r}.
        let jx = jac.mul(&x)?;
        let rhs = SeriesMatrix::new(
            n,
            jx.entries.iter().map(|e| e.homogeneous_part(q)).collect(),
        )?;
        let correction = x0_series.mul(&rhs)?;
        let entries = x
            .entries
            .iter()
            .zip(&correction.entries)
            .map(|(a, c)| a.sub(c))
            .collect::<Result<Vec<_>>>()?;
        x = SeriesMatrix::new(n, entries)?;
    }
    Ok(x)
}

/// The coefficient tensors `A^1 .. A^m` (`m = order - 1`) at `point`.
pub fn build_terms(problem: &Problem, point: &Vector, spec: SchemeSpec) -> Result<Vec<SchemeTerm>> {
    let n = problem.nvars();
    let m = spec.terms();
    let jac = jacobian_series(problem, point, m - 1)?;
    let inv = series_matrix_inverse(&jac)?;

    let mut terms = Vec::with_capacity(m);
    // A^1[i, r] = X[i, r]
    terms.push(SchemeTerm::from_tensor(1, n, inv.entries.clone()));

    for p in 1..m {
        let prev = &terms[p - 1];
        let budget = m - p - 1;
        assert_eq!(prev.tensor[0].max_degree(), budget + 1, "jet budget");
        let inv_t = inv.truncate(budget);
        let mut next = Vec::with_capacity(prev.tensor.len() * n);
        for entry in &prev.tensor {
            let partials = (0..n)
                .map(|s| entry.partial(s))
                .collect::<Result<Vec<_>>>()?;
            for r in 0..n {
                let mut acc = inv_t.get(0, r).mul(&partials[0])?;
                for (s, d) in partials.iter().enumerate().skip(1) {
                    acc = acc.add(&inv_t.get(s, r).mul(d)?)?;
                }
                next.push(acc);
            }
        }
        terms.push(SchemeTerm::from_tensor(p + 1, n, next));
    }
    Ok(terms)
}

/// `x + Σ_p (1/p!) A^p · (-f)^{⊗p}`.
pub fn apply_update(terms: &[SchemeTerm], f_at_point: &Vector, point: &Vector) -> Result<Vector> {
    let prec = point[0].precision();
    let neg_f = f_at_point.neg();
    let mut next = point.clone();
    for term in terms {
        if term.dim() != point.dim() || f_at_point.dim() != point.dim() {
            return Err(Error::DimensionMismatch(
                "scheme term and point sizes differ".into(),
            ));
        }
        let inv_fact = prec.factorial(term.order()).recip()?;
        let contribution = term.contract(&neg_f).scale(&inv_fact);
        next = next.add(&contribution)?;
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_problem;
    use crate::numerics::{norm_inf, Precision};

    const INCAS: &str = "vars: x1 x2\neq: x1 - x2\neq: x1^2 + x2^2 - 2\nstart: 4 4\n";

    fn prec() -> Precision {
        Precision::new(100).unwrap()
    }

    #[test]
    fn spec_bounds() {
        assert!(SchemeSpec::new(1).is_err());
        assert!(SchemeSpec::new(MAX_ORDER + 1).is_err());
        let s = SchemeSpec::new(4).unwrap();
        assert_eq!(s.terms() + 1, s.order());
    }

    #[test]
    fn jacobian_of_test_system() {
        let p = parse_problem(INCAS, prec()).unwrap();
        let j = jacobian_series(&p, p.start(), 2).unwrap();
        let c = j.constant_part();
        let i = |v| prec().from_i64(v);
        assert_eq!((c[(0, 0)].clone(), c[(0, 1)].clone()), (i(1), i(-1)));
        assert_eq!((c[(1, 0)].clone(), c[(1, 1)].clone()), (i(8), i(8)));
        // ∂f2/∂x1 = 2 x1 → linear coefficient 2 in h1
        assert_eq!(j.get(1, 0).coeff(&[1, 0]).unwrap(), &i(2));
        let d0 = jacobian_series(&p, p.start(), 0).unwrap();
        assert_eq!(d0.max_degree(), 0);
    }

    #[test]
    fn affine_listing_rows() {
        let text = "vars: a b c\neq: a+2*b+c\neq: 2*a-b-c\neq: a+b+c-3\nstart: 2.1 2.2 -1\n";
        let p = parse_problem(text, prec()).unwrap();
        let j = jacobian_series(&p, p.start(), 3).unwrap();
        let row = |r: usize| {
            (0..3)
                .map(|c| j.get(r, c).constant_term().to_f64())
                .collect::<Vec<_>>()
        };
        assert_eq!(row(0), vec![1.0, 2.0, 1.0]);
        assert_eq!(row(1), vec![2.0, -1.0, -1.0]);
        for r in 0..3 {
            for c in 0..3 {
                assert!(j.get(r, c).terms().skip(1).all(|(_, v)| v.is_zero()));
            }
        }
    }

    #[test]
    fn series_inverse_identity_and_test_system() {
        let one = TaylorPoly::constant(prec().one(), 2, 2);
        let zero = TaylorPoly::zero(2, 2, prec());
        let id = SeriesMatrix::new(2, vec![one.clone(), zero.clone(), zero, one]).unwrap();
        assert_eq!(series_matrix_inverse(&id).unwrap(), id);

        let p = parse_problem(INCAS, prec()).unwrap();
        let j = jacobian_series(&p, p.start(), 3).unwrap();
        let x = series_matrix_inverse(&j).unwrap();
        let c = x.constant_part();
        let sixteenth = |v: i64| &prec().from_i64(v) / &prec().from_i64(16);
        assert_eq!(c[(0, 0)], sixteenth(8));
        assert_eq!(c[(0, 1)], sixteenth(1));
        assert_eq!(c[(1, 0)], sixteenth(-8));
        assert_eq!(c[(1, 1)], sixteenth(1));

        let prod = j.mul(&x).unwrap();
        let tol = prec().epsilon_with_slack(15);
        for r in 0..2 {
            for col in 0..2 {
                let e = prod.get(r, col);
                let e = if r == col {
                    e.add_constant(&-prec().one())
                } else {
                    e.clone()
                };
                assert!(e.max_abs_coeff() < tol);
            }
        }
    }

    #[test]
    fn singular_constant_part() {
        let p = parse_problem("vars: x\neq: x^2\nstart: 0\n", prec()).unwrap();
        let spec = SchemeSpec::new(3).unwrap();
        assert!(matches!(
            build_terms(&p, p.start(), spec),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn term_shapes_and_degrees() {
        let p = parse_problem(INCAS, prec()).unwrap();
        let terms = build_terms(&p, p.start(), SchemeSpec::new(5).unwrap()).unwrap();
        assert_eq!(terms.len(), 4);
        for (k, t) in terms.iter().enumerate() {
            assert_eq!(t.order(), k + 1);
            assert_eq!(t.tensor().len(), 2usize.pow(k as u32 + 2));
            assert_eq!(t.tensor()[0].max_degree(), 3 - k);
        }
        let inv = lu_invert(&jacobian_series(&p, p.start(), 0).unwrap().constant_part()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(terms[0].value(&[i, j]), &inv[(i, j)]);
            }
        }
    }

    #[test]
    fn newton_step_on_test_system() {
        let p = parse_problem(INCAS, prec()).unwrap();
        let spec = SchemeSpec::new(2).unwrap();
        let terms = build_terms(&p, p.start(), spec).unwrap();
        let f = p.residual(p.start()).unwrap();
        let next = apply_update(&terms, &f, p.start()).unwrap();
        let expected = prec().parse("2.125").unwrap();
        assert_eq!(next[0], expected);
        assert_eq!(next[1], expected);
    }

    #[test]
    fn zero_residual_is_a_fixed_point() {
        let p = parse_problem(INCAS, prec()).unwrap();
        let terms = build_terms(&p, p.start(), SchemeSpec::new(4).unwrap()).unwrap();
        let zero = Vector::zeros(2, prec());
        let next = apply_update(&terms, &zero, p.start()).unwrap();
        assert_eq!(&next, p.start());
    }

    #[test]
    fn affine_terms_vanish() {
        let text = "vars: a b\neq: 3*a - b + 1\neq: a + 2*b - 4\nstart: 10 -7\n";
        let p = parse_problem(text, prec()).unwrap();
        let terms = build_terms(&p, p.start(), SchemeSpec::new(6).unwrap()).unwrap();
        for t in &terms[1..] {
            assert!(t.values().iter().all(Scalar::is_zero));
        }
        let f = p.residual(p.start()).unwrap();
        let next = apply_update(&terms, &f, p.start()).unwrap();
        let res = p.residual(&next).unwrap();
        assert!(norm_inf(&res) < prec().epsilon_with_slack(15));
    }
}
