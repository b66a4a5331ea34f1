//! Multivariate truncated Taylor polynomials ("jets") over [`Scalar`].
//!
//! A [`TaylorPoly`] in `n` variables of degree `d` stores one coefficient per
//! monomial of total degree `<= d`, in graded-lexicographic order. Coefficients
//! are Taylor coefficients, `∂^α f / α!`, so multiplication is a plain
//! truncated convolution.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::numerics::{Precision, Scalar};

/// Exponent vector of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn zero(nvars: usize) -> Self {
        Self(vec![0; nvars])
    }

    pub fn unit(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    /// `α! = Π α_i!`
    pub fn factorial(&self, prec: Precision) -> Scalar {
        self.0
            .iter()
            .fold(prec.one(), |acc, &e| &acc * &prec.factorial(e as usize))
    }

    /// Multiplicity counts of a tuple of variable indices, e.g. `(0, 1, 0)`
    /// over 2 variables gives `x0^2 x1`.
    pub fn from_slots(nvars: usize, slots: &[usize]) -> Self {
        let mut e = vec![0; nvars];
        for &s in slots {
            e[s] += 1;
        }
        Self(e)
    }
}

/// Graded order: total degree first, then lexicographically descending
/// exponents, so `x0` precedes `x1` within a degree.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Monomial enumeration and index tables for one `(nvars, max_degree)` pair.
#[derive(Debug)]
struct Layout {
    nvars: usize,
    max_degree: usize,
    monomials: Vec<MultiIndex>,
    degrees: Vec<usize>,
    lookup: HashMap<Vec<u32>, usize>,
    /// `(i, j, k)` with `monomials[i] + monomials[j] == monomials[k]`.
    products: Vec<(u32, u32, u32)>,
}

impl Layout {
    fn build(nvars: usize, max_degree: usize) -> Self {
        let mut monomials = Vec::new();
        for degree in 0..=max_degree {
            let mut block = Vec::new();
            let mut current = vec![0u32; nvars];
            compositions(nvars, degree as u32, 0, &mut current, &mut block);
            block.sort();
            monomials.extend(block);
        }
        let degrees: Vec<usize> = monomials.iter().map(MultiIndex::degree).collect();
        let lookup: HashMap<Vec<u32>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(k, m)| (m.0.clone(), k))
            .collect();
        let mut products = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                if degrees[i] + degrees[j] > max_degree {
                    continue;
                }
                let sum: Vec<u32> = a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect();
                products.push((i as u32, j as u32, lookup[&sum] as u32));
            }
        }
        Self {
            nvars,
            max_degree,
            monomials,
            degrees,
            lookup,
            products,
        }
    }

    fn len(&self) -> usize {
        self.monomials.len()
    }

    fn get(nvars: usize, max_degree: usize) -> Arc<Layout> {
        type Cache = Mutex<HashMap<(usize, usize), Arc<Layout>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut map = cache.lock().expect("layout cache poisoned");
        map.entry((nvars, max_degree))
            .or_insert_with(|| Arc::new(Layout::build(nvars, max_degree)))
            .clone()
    }
}

fn compositions(
    nvars: usize,
    remaining: u32,
    pos: usize,
    cur: &mut Vec<u32>,
    out: &mut Vec<MultiIndex>,
) {
    if pos + 1 == nvars {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    if nvars == 0 {
        out.push(MultiIndex(Vec::new()));
        return;
    }
    for e in 0..=remaining {
        cur[pos] = e;
        compositions(nvars, remaining - e, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Elementary functions that can be composed with a jet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Elementary {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    PowInt(u32),
}

impl Elementary {
    /// Taylor coefficients `fn^(k)(c) / k!` for `k = 0..=degree`.
    fn series_at(self, c: &Scalar, degree: usize) -> Result<Vec<Scalar>> {
        let prec = c.precision();
        let mut out = Vec::with_capacity(degree + 1);
        match self {
            Elementary::Exp => {
                let e = c.exp();
                for k in 0..=degree {
                    out.push(&e / &prec.factorial(k));
                }
            }
            Elementary::Log => {
                out.push(c.ln()?);
                let inv = c.recip()?;
                let mut power = prec.one();
                for k in 1..=degree {
                    power = &power * &inv;
                    let term = &power / &prec.from_i64(k as i64);
                    out.push(if k % 2 == 1 { term } else { -term });
                }
            }
            Elementary::Sin | Elementary::Cos => {
                let (s, co) = (c.sin(), c.cos());
                // derivative cycle of sin: sin, cos, -sin, -cos
                let cycle = [s.clone(), co.clone(), -&s, -&co];
                let offset = if self == Elementary::Sin { 0 } else { 1 };
                for k in 0..=degree {
                    out.push(&cycle[(k + offset) % 4] / &prec.factorial(k));
                }
            }
            Elementary::Sqrt => {
                if c.is_negative() || c.abs() <= prec.singular_threshold() {
                    return Err(Error::Domain {
                        function: "sqrt",
                        detail: "jet expansion point must be positive".into(),
                    });
                }
                out.push(c.sqrt()?);
                let inv = c.recip()?;
                let half = &prec.one() / &prec.from_i64(2);
                for k in 1..=degree {
                    // s_k = s_{k-1} * (1/2 - (k-1)) / (k c)
                    let num = &half - &prec.from_i64(k as i64 - 1);
                    let next = &(&out[k - 1] * &num) * &inv;
                    out.push(&next / &prec.from_i64(k as i64));
                }
            }
            Elementary::PowInt(n) => {
                let n = n as usize;
                for k in 0..=degree {
                    if k > n {
                        out.push(prec.zero());
                    } else {
                        let coeff = prec.from_u64(binomial(n, k) as u64);
                        out.push(&coeff * &c.powi((n - k) as u32));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn name(self) -> &'static str {
        match self {
            Elementary::Exp => "exp",
            Elementary::Log => "log",
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Sqrt => "sqrt",
            Elementary::PowInt(_) => "pow",
        }
    }
}

/// Truncated multivariate Taylor polynomial.
#[derive(Clone, Debug)]
pub struct TaylorPoly {
    layout: Arc<Layout>,
    coeffs: Vec<Scalar>,
}

impl PartialEq for TaylorPoly {
    fn eq(&self, other: &Self) -> bool {
        self.nvars() == other.nvars()
            && self.max_degree() == other.max_degree()
            && self.coeffs == other.coeffs
    }
}

impl TaylorPoly {
    pub fn zero(nvars: usize, max_degree: usize, prec: Precision) -> Self {
        let layout = Layout::get(nvars, max_degree);
        let coeffs = vec![prec.zero(); layout.len()];
        Self { layout, coeffs }
    }

    pub fn constant(value: Scalar, nvars: usize, max_degree: usize) -> Self {
        let mut p = Self::zero(nvars, max_degree, value.precision());
        p.coeffs[0] = value;
        p
    }

    /// Seed jet for variable `i` around `base`: `base + h_i`.
    pub fn variable(i: usize, base: Scalar, nvars: usize, max_degree: usize) -> Result<Self> {
        if i >= nvars {
            return Err(Error::VariableOutOfRange { index: i, nvars });
        }
        let prec = base.precision();
        let mut p = Self::constant(base, nvars, max_degree);
        if max_degree >= 1 {
            let k = p.layout.lookup[MultiIndex::unit(nvars, i).exponents()];
            p.coeffs[k] = prec.one();
        }
        Ok(p)
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs; unlisted
    /// coefficients are zero.
    pub fn from_terms(
        nvars: usize,
        max_degree: usize,
        prec: Precision,
        terms: impl IntoIterator<Item = (MultiIndex, Scalar)>,
    ) -> Result<Self> {
        let mut p = Self::zero(nvars, max_degree, prec);
        for (idx, c) in terms {
            let k = p.index_of(&idx).ok_or_else(|| {
                Error::DimensionMismatch(format!("monomial {:?} outside layout", idx.exponents()))
            })?;
            p.coeffs[k] = c;
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn max_degree(&self) -> usize {
        self.layout.max_degree
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn precision(&self) -> Precision {
        self.coeffs[0].precision()
    }

    pub fn constant_term(&self) -> &Scalar {
        &self.coeffs[0]
    }

    fn index_of(&self, idx: &MultiIndex) -> Option<usize> {
        if idx.exponents().len() != self.nvars() {
            return None;
        }
        self.layout.lookup.get(idx.exponents()).copied()
    }

    /// Coefficient of `x^α`, or `None` if `α` is out of range.
    pub fn coeff(&self, exponents: &[u32]) -> Option<&Scalar> {
        self.layout.lookup.get(exponents).map(|&k| &self.coeffs[k])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Scalar)> {
        self.layout.monomials.iter().zip(&self.coeffs)
    }

    pub fn coefficients(&self) -> &[Scalar] {
        &self.coeffs
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> Scalar {
        self.coeffs
            .iter()
            .map(Scalar::abs)
            .reduce(|a, b| a.max(&b))
            .expect("at least a constant term")
    }

    fn check_shape(&self, other: &TaylorPoly) -> Result<()> {
        if self.nvars() != other.nvars() || self.max_degree() != other.max_degree() {
            return Err(Error::ShapeMismatch {
                lhs_vars: self.nvars(),
                lhs_degree: self.max_degree(),
                rhs_vars: other.nvars(),
                rhs_degree: other.max_degree(),
            });
        }
        Ok(())
    }

    fn with_coeffs(&self, coeffs: Vec<Scalar>) -> Self {
        Self {
            layout: self.layout.clone(),
            coeffs,
        }
    }

    pub fn add(&self, other: &TaylorPoly) -> Result<TaylorPoly> {
        self.check_shape(other)?;
        Ok(self.with_coeffs(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &TaylorPoly) -> Result<TaylorPoly> {
        self.check_shape(other)?;
        Ok(self.with_coeffs(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    /// Truncated product: terms of total degree above `max_degree` are dropped.
    pub fn mul(&self, other: &TaylorPoly) -> Result<TaylorPoly> {
        self.check_shape(other)?;
        let zero = self.coeffs[0].zero_like();
        let mut out = vec![zero; self.len()];
        let nonzero_a: Vec<bool> = self.coeffs.iter().map(|c| !c.is_zero()).collect();
        let nonzero_b: Vec<bool> = other.coeffs.iter().map(|c| !c.is_zero()).collect();
        for &(i, j, k) in &self.layout.products {
            let (i, j) = (i as usize, j as usize);
            if nonzero_a[i] && nonzero_b[j] {
                out[k as usize] += &(&self.coeffs[i] * &other.coeffs[j]);
            }
        }
        Ok(self.with_coeffs(out))
    }

    pub fn neg(&self) -> TaylorPoly {
        self.with_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, s: &Scalar) -> TaylorPoly {
        self.with_coeffs(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add_constant(&self, s: &Scalar) -> TaylorPoly {
        let mut out = self.clone();
        out.coeffs[0] = &out.coeffs[0] + s;
        out
    }

    /// Drops all terms above `degree` (no-op if `degree >= max_degree`).
    pub fn truncate(&self, degree: usize) -> TaylorPoly {
        if degree >= self.max_degree() {
            return self.clone();
        }
        let layout = Layout::get(self.nvars(), degree);
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Self { layout, coeffs }
    }

    /// Only the terms of total degree exactly `q`.
    pub fn homogeneous_part(&self, q: usize) -> TaylorPoly {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&self.layout.degrees)
            .map(|(c, &d)| if d == q { c.clone() } else { c.zero_like() })
            .collect();
        self.with_coeffs(coeffs)
    }

    /// `self - constant_term`.
    fn without_constant(&self) -> TaylorPoly {
        let mut out = self.clone();
        out.coeffs[0] = out.coeffs[0].zero_like();
        out
    }

    /// Evaluates `Σ s_k h^k` with `h = self - const` by Horner's rule.
    fn compose_series(&self, series: &[Scalar]) -> Result<TaylorPoly> {
        let h = self.without_constant();
        let d = self.max_degree();
        let mut acc = TaylorPoly::constant(series[d].clone(), self.nvars(), d);
        for k in (0..d).rev() {
            acc = acc.mul(&h)?.add_constant(&series[k]);
        }
        Ok(acc)
    }

    /// `1 / self`, truncated.
    pub fn recip(&self) -> Result<TaylorPoly> {
        let c = self.constant_term();
        let prec = c.precision();
        if c.abs() <= prec.singular_threshold() {
            return Err(Error::DivisionByZeroJet);
        }
        // 1/(c+h) = Σ (-1)^k h^k / c^(k+1)
        let inv = c.recip()?;
        let mut series = Vec::with_capacity(self.max_degree() + 1);
        let mut term = inv.clone();
        for _ in 0..=self.max_degree() {
            series.push(term.clone());
            term = -&(&term * &inv);
        }
        self.compose_series(&series)
    }

    pub fn div(&self, other: &TaylorPoly) -> Result<TaylorPoly> {
        self.mul(&other.recip()?)
    }

    /// `f ∘ self` for an elementary `f`.
    pub fn compose(&self, f: Elementary) -> Result<TaylorPoly> {
        let series = f.series_at(self.constant_term(), self.max_degree())?;
        self.compose_series(&series)
    }

    /// Integer power by repeated squaring (exact truncated products).
    pub fn powi(&self, n: u32) -> Result<TaylorPoly> {
        let mut result =
            TaylorPoly::constant(self.precision().one(), self.nvars(), self.max_degree());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Formal partial derivative in variable `i`; the result has degree
    /// `max_degree - 1` (a zero constant jet when `max_degree == 0`).
    pub fn partial(&self, i: usize) -> Result<TaylorPoly> {
        let n = self.nvars();
        if i >= n {
            return Err(Error::VariableOutOfRange { index: i, nvars: n });
        }
        let prec = self.precision();
        if self.max_degree() == 0 {
            return Ok(TaylorPoly::zero(n, 0, prec));
        }
        let layout = Layout::get(n, self.max_degree() - 1);
        let coeffs = layout
            .monomials
            .iter()
            .map(|m| {
                let mut shifted = m.0.clone();
                shifted[i] += 1;
                let src = &self.coeffs[self.layout.lookup[&shifted]];
                if src.is_zero() {
                    src.clone()
                } else {
                    src * &prec.from_u64(shifted[i] as u64)
                }
            })
            .collect();
        Ok(Self { layout, coeffs })
    }

    /// All raw partial derivatives of order `p` at the expansion point.
    pub fn derivative_tensor(&self, order: usize) -> Result<DerivativeTensor> {
        if order > self.max_degree() {
            return Err(Error::OrderTooHigh {
                order,
                max_degree: self.max_degree(),
            });
        }
        let n = self.nvars();
        let prec = self.precision();
        let size = n.pow(order as u32);
        let mut cache: HashMap<MultiIndex, Scalar> = HashMap::new();
        let mut entries = Vec::with_capacity(size);
        let mut slots = vec![0usize; order];
        for flat in 0..size {
            let mut rem = flat;
            for s in slots.iter_mut().rev() {
                *s = rem % n;
                rem /= n;
            }
            let alpha = MultiIndex::from_slots(n, &slots);
            let value = cache
                .entry(alpha.clone())
                .or_insert_with(|| {
                    let c = &self.coeffs[self.layout.lookup[alpha.exponents()]];
                    c * &alpha.factorial(prec)
                })
                .clone();
            entries.push(value);
        }
        Ok(DerivativeTensor {
            nvars: n,
            order,
            entries,
        })
    }
}

/// Dense symmetric tensor of raw partial derivatives `∂^p f / ∂x_{i1}...∂x_{ip}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeTensor {
    nvars: usize,
    order: usize,
    entries: Vec<Scalar>,
}

impl DerivativeTensor {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, index: &[usize]) -> &Scalar {
        assert_eq!(index.len(), self.order, "tensor index rank");
        let flat = index.iter().fold(0, |acc, &i| {
            assert!(i < self.nvars, "tensor index out of range");
            acc * self.nvars + i
        });
        &self.entries[flat]
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }
}

/// Number of coefficients of a jet: `C(n + d, d)`.
pub fn coefficient_count(nvars: usize, max_degree: usize) -> usize {
    binomial(nvars + max_degree, max_degree)
}
