//! Arbitrary-precision scalars and the small amount of dense linear algebra
//! the scheme builder needs.
//!
//! Every [`Scalar`] carries the [`Precision`] it was created with. Binary
//! operations run at the larger of the two operand precisions, so a solve
//! that builds all of its values from one `Precision` stays at that precision
//! throughout.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};

use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;
const LOG2_10: f64 = std::f64::consts::LOG2_10;

thread_local! {
    // Cache of mathematical constants used by astro-float for transcendental
    // functions and radix conversion. It holds no numeric state of ours.
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Working precision of a solve, in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Precision {
    digits: u32,
    bits: usize,
}

impl Precision {
    pub const MIN_DIGITS: u32 = 16;
    pub const DEFAULT_DIGITS: u32 = 1000;

    pub fn new(digits: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::InvalidPrecision {
                got: digits,
                min: Self::MIN_DIGITS,
            });
        }
        let bits = (digits as f64 * LOG2_10).ceil() as usize;
        let bits = bits.div_ceil(64) * 64;
        Ok(Self { digits, bits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn zero(&self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        Scalar::wrap(BigFloat::from_i64(v, self.bits), *self)
    }

    pub fn from_u64(&self, v: u64) -> Scalar {
        Scalar::wrap(BigFloat::from_u64(v, self.bits), *self)
    }

    /// Exact conversion of a binary64 value.
    pub fn from_f64(&self, v: f64) -> Scalar {
        Scalar::wrap(BigFloat::from_f64(v, self.bits), *self)
    }

    /// Parses a signed decimal with optional exponent, correctly rounded to
    /// this precision.
    pub fn parse(&self, text: &str) -> Result<Scalar> {
        Scalar::from_decimal(text, *self)
    }

    /// `10^exp`.
    pub fn pow10(&self, exp: i64) -> Scalar {
        self.parse(&format!("1e{exp}"))
            .expect("power of ten literal is well formed")
    }

    /// `10^(-digits + slack)`: a tolerance a given number of digits above the
    /// working-precision floor.
    pub fn epsilon_with_slack(&self, slack: i64) -> Scalar {
        self.pow10(-(self.digits as i64) + slack)
    }

    /// Pivots and jet constant terms below `10^(-digits/2)` count as zero.
    pub fn singular_threshold(&self) -> Scalar {
        self.pow10(-(self.digits as i64) / 2)
    }

    /// `k!` as an exact scalar.
    pub fn factorial(&self, k: usize) -> Scalar {
        (2..=k as i64).fold(self.one(), |acc, i| &acc * &self.from_i64(i))
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self::new(Self::DEFAULT_DIGITS).expect("default precision is valid")
    }
}

/// How [`Scalar::to_sci`] drops digits past the requested count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    /// Drop extra digits (round toward zero).
    Truncate,
    /// Round half away from zero.
    Nearest,
}

/// Arbitrary-precision binary floating-point number.
#[derive(Clone)]
pub struct Scalar {
    value: BigFloat,
    prec: Precision,
}

fn is_decimal_literal(text: &str) -> bool {
    let s = text.strip_prefix(['+', '-']).unwrap_or(text);
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], Some(&s[pos + 1..])),
        None => (s, None),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if int_part.is_empty() && frac_part.is_empty() {
        return false;
    }
    if !all_digits(int_part) || !all_digits(frac_part) {
        return false;
    }
    match exponent {
        None => true,
        Some(e) => {
            let e = e.strip_prefix(['+', '-']).unwrap_or(e);
            !e.is_empty() && all_digits(e)
        }
    }
}

impl Scalar {
    fn wrap(value: BigFloat, prec: Precision) -> Self {
        Self { value, prec }
    }

    pub fn from_decimal(text: &str, prec: Precision) -> Result<Self> {
        let trimmed = text.trim();
        if !is_decimal_literal(trimmed) {
            return Err(Error::MalformedDecimal(text.to_string()));
        }
        let value = with_consts(|cc| BigFloat::parse(trimmed, Radix::Dec, prec.bits, RM, cc));
        if value.is_nan() || value.is_inf() {
            return Err(Error::MalformedDecimal(text.to_string()));
        }
        Ok(Self::wrap(value, prec))
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    /// Rounds (or widens) to another precision.
    pub fn with_precision(&self, prec: Precision) -> Self {
        let mut value = self.value.clone();
        value
            .set_precision(prec.bits, RM)
            .expect("precision change of a finite value");
        Self::wrap(value, prec)
    }

    fn joint(&self, other: &Scalar) -> Precision {
        if other.prec.bits > self.prec.bits {
            other.prec
        } else {
            self.prec
        }
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.value.is_nan() && !self.value.is_inf()
    }

    pub fn is_negative(&self) -> bool {
        !self.is_zero() && self.value.is_negative()
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.value.abs(), self.prec)
    }

    pub fn zero_like(&self) -> Self {
        self.prec.zero()
    }

    pub fn one_like(&self) -> Self {
        self.prec.one()
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::wrap(
            self.value.reciprocal(self.prec.bits, RM),
            self.prec,
        ))
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self / rhs)
    }

    pub fn powi(&self, n: u32) -> Self {
        if n == 0 {
            return self.one_like();
        }
        Self::wrap(self.value.powi(n as usize, self.prec.bits, RM), self.prec)
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.is_negative() {
            return Err(Error::Domain {
                function: "sqrt",
                detail: format!("negative argument {}", self.to_sci(10, Rounding::Nearest)),
            });
        }
        Ok(Self::wrap(self.value.sqrt(self.prec.bits, RM), self.prec))
    }

    pub fn exp(&self) -> Self {
        let v = with_consts(|cc| self.value.exp(self.prec.bits, RM, cc));
        Self::wrap(v, self.prec)
    }

    pub fn ln(&self) -> Result<Self> {
        if self.is_zero() || self.is_negative() {
            return Err(Error::Domain {
                function: "log",
                detail: format!(
                    "non-positive argument {}",
                    self.to_sci(10, Rounding::Nearest)
                ),
            });
        }
        let v = with_consts(|cc| self.value.ln(self.prec.bits, RM, cc));
        Ok(Self::wrap(v, self.prec))
    }

    pub fn sin(&self) -> Self {
        let v = with_consts(|cc| self.value.sin(self.prec.bits, RM, cc));
        Self::wrap(v, self.prec)
    }

    pub fn cos(&self) -> Self {
        let v = with_consts(|cc| self.value.cos(self.prec.bits, RM, cc));
        Self::wrap(v, self.prec)
    }

    pub fn max(&self, other: &Scalar) -> Scalar {
        if other > self {
            other.clone()
        } else {
            self.clone()
        }
    }

    /// Base-10 logarithm of `|self|` in binary64; `-inf` for zero. Good for
    /// magnitudes far below `f64::MIN_POSITIVE`.
    pub fn log10_abs(&self) -> f64 {
        match self.value.as_raw_parts() {
            Some((words, _, _, exp, _)) if !self.is_zero() => {
                let top = *words.last().expect("normalized mantissa") as f64;
                let frac = top / 2f64.powi(64);
                (exp as f64 + frac.log2()) / LOG2_10
            }
            _ => f64::NEG_INFINITY,
        }
    }

    /// Nearest binary64 value (saturating to 0 / ±inf outside its range).
    pub fn to_f64(&self) -> f64 {
        match self.value.as_raw_parts() {
            Some((words, _, sign, exp, _)) if !self.is_zero() => {
                let top = *words.last().expect("normalized mantissa") as f64;
                let next = if words.len() > 1 {
                    words[words.len() - 2] as f64 / 2f64.powi(64)
                } else {
                    0.0
                };
                let frac = (top + next) / 2f64.powi(64);
                let mag = if exp > 1100 {
                    f64::INFINITY
                } else if exp < -1100 {
                    0.0
                } else {
                    frac * 2f64.powi(exp)
                };
                if sign == Sign::Neg {
                    -mag
                } else {
                    mag
                }
            }
            _ => 0.0,
        }
    }

    /// Decimal digits `d1 d2 ...` and exponent `e` with `|self| = 0.d1d2... * 10^e`.
    fn decimal_expansion(&self) -> Option<(bool, Vec<u8>, i64)> {
        if self.is_zero() {
            return None;
        }
        let (sign, digits, exp) = with_consts(|cc| self.value.convert_to_radix(Radix::Dec, RM, cc))
            .expect("finite value converts to decimal");
        Some((sign == Sign::Neg, digits, exp as i64))
    }

    /// Scientific notation with at most `sig` significant digits, e.g.
    /// `2.125e0`, `8.272058823e-1`, `0e0`.
    ///
    /// Trailing zeros are dropped, except when truncating a value that does
    /// not fit in `sig` digits: `2.636279370e-1` keeps its last zero because
    /// the digits after it are not all zero.
    pub fn to_sci(&self, sig: usize, rounding: Rounding) -> String {
        let sig = sig.max(1);
        let Some((negative, mut digits, exp)) = self.decimal_expansion() else {
            return "0e0".to_string();
        };
        let mut exp10 = exp - 1;
        // digits past the working precision are conversion noise
        let meaningful = digits.len().min(self.prec.digits as usize);
        let inexact =
            digits.len() > sig && digits[sig..meaningful.max(sig)].iter().any(|&d| d != 0);
        let keep_zeros = rounding == Rounding::Truncate && inexact;
        if digits.len() > sig {
            let round_up = rounding == Rounding::Nearest && digits[sig] >= 5;
            digits.truncate(sig);
            if round_up {
                let mut i = sig;
                loop {
                    if i == 0 {
                        digits.insert(0, 1);
                        digits.truncate(sig);
                        exp10 += 1;
                        break;
                    }
                    i -= 1;
                    if digits[i] == 9 {
                        digits[i] = 0;
                    } else {
                        digits[i] += 1;
                        break;
                    }
                }
            }
        }
        while !keep_zeros && digits.len() > 1 && *digits.last().unwrap() == 0 {
            digits.pop();
        }
        let mut out = String::with_capacity(digits.len() + 8);
        if negative {
            out.push('-');
        }
        out.push((b'0' + digits[0]) as char);
        if digits.len() > 1 {
            out.push('.');
            out.extend(digits[1..].iter().map(|d| (b'0' + d) as char));
        }
        out.push('e');
        out.push_str(&exp10.to_string());
        out
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({})", self.to_sci(40, Rounding::Nearest))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(self.prec.digits as usize);
        f.write_str(&self.to_sci(digits, Rounding::Nearest))
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.value.cmp(&other.value) == Some(0)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.cmp(&other.value).map(|c| c.cmp(&0))
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $call:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                let prec = self.joint(rhs);
                Scalar::wrap(self.value.$call(&rhs.value, prec.bits, RM), prec)
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

impl_binop!(Add, add, add);
impl_binop!(Sub, sub, sub);
impl_binop!(Mul, mul, mul);
impl_binop!(Div, div, div);

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        *self = &*self - rhs;
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::wrap(BigFloat::neg(&self.value), self.prec)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

/// Dense column vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector(Vec<Scalar>);

impl Vector {
    pub fn new(entries: Vec<Scalar>) -> Self {
        Self(entries)
    }

    pub fn zeros(dim: usize, prec: Precision) -> Self {
        Self(vec![prec.zero(); dim])
    }

    pub fn from_decimals<S: AsRef<str>>(texts: &[S], prec: Precision) -> Result<Self> {
        texts
            .iter()
            .map(|t| prec.parse(t.as_ref()))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Scalar> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Scalar] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Scalar> {
        self.0
    }

    fn check_dim(&self, other: &Vector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector lengths {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        self.check_dim(other)?;
        Ok(Self(
            self.iter().zip(other.iter()).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.check_dim(other)?;
        Ok(Self(
            self.iter().zip(other.iter()).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn neg(&self) -> Vector {
        Self(self.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, s: &Scalar) -> Vector {
        Self(self.iter().map(|a| a * s).collect())
    }

    /// Largest absolute entry; zero for an empty vector.
    pub fn norm_inf(&self) -> Option<Scalar> {
        let mut it = self.iter();
        let first = it.next()?.abs();
        Some(it.fold(first, |m, v| m.max(&v.abs())))
    }
}

impl Index<usize> for Vector {
    type Output = Scalar;
    fn index(&self, i: usize) -> &Scalar {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut Scalar {
        &mut self.0[i]
    }
}

impl FromIterator<Scalar> for Vector {
    fn from_iter<I: IntoIterator<Item = Scalar>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// `max_i |v_i|`.
pub fn norm_inf(v: &Vector) -> Scalar {
    v.norm_inf().expect("norm of an empty vector")
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix from {} entries",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(nrows, ncols, rows.into_iter().flatten().collect())
    }

    pub fn zeros(rows: usize, cols: usize, prec: Precision) -> Self {
        Self {
            rows,
            cols,
            data: vec![prec.zero(); rows * cols],
        }
    }

    pub fn identity(n: usize, prec: Precision) -> Self {
        let mut m = Self::zeros(n, n, prec);
        for i in 0..n {
            m[(i, i)] = prec.one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = self[(r, 0)].zero_like();
                for k in 0..self.cols {
                    acc += &(&self[(r, k)] * &other[(k, c)]);
                }
                data.push(acc);
            }
        }
        Matrix::new(self.rows, other.cols, data)
    }

    pub fn mul_vec(&self, v: &Vector) -> Result<Vector> {
        if self.cols != v.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        Ok((0..self.rows)
            .map(|r| (0..self.cols).fold(v[0].zero_like(), |acc, c| acc + &self[(r, c)] * &v[c]))
            .collect())
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("matrix difference".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Matrix::new(self.rows, self.cols, data)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> Scalar {
        (0..self.rows)
            .map(|r| {
                (0..self.cols).fold(self[(r, 0)].zero_like(), |acc, c| acc + self[(r, c)].abs())
            })
            .reduce(|a, b| a.max(&b))
            .expect("non-empty matrix")
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Scalar;
    fn index(&self, (r, c): (usize, usize)) -> &Scalar {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Scalar {
        &mut self.data[r * self.cols + c]
    }
}

/// LU factorization with partial pivoting, `P·A = L·U`.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn decompose(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "LU of a {}x{} matrix",
                m.rows, m.cols
            )));
        }
        let n = m.rows;
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let threshold = m.data[0].precision().singular_threshold();

        for k in 0..n {
            let pivot_row = (k..n)
                .max_by(|&a, &b| {
                    lu[(a, k)]
                        .abs()
                        .partial_cmp(&lu[(b, k)].abs())
                        .unwrap_or(Ordering::Equal)
                })
                .expect("non-empty pivot range");
            if lu[(pivot_row, k)].abs() < threshold {
                return Err(Error::SingularMatrix { column: k });
            }
            if pivot_row != k {
                for c in 0..n {
                    lu.data.swap(k * n + c, pivot_row * n + c);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = lu[(k, k)].clone();
            for r in (k + 1)..n {
                let factor = &lu[(r, k)] / &pivot;
                if factor.is_zero() {
                    lu[(r, k)] = factor;
                    continue;
                }
                for c in (k + 1)..n {
                    let delta = &factor * &lu[(k, c)];
                    lu[(r, c)] -= &delta;
                }
                lu[(r, k)] = factor;
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &Vector) -> Result<Vector> {
        if b.dim() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} for a {}x{} system",
                b.dim(),
                self.n,
                self.n
            )));
        }
        let n = self.n;
        let mut y: Vec<Scalar> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for r in 0..n {
            for c in 0..r {
                let t = &self.lu[(r, c)] * &y[c];
                y[r] -= &t;
            }
        }
        for r in (0..n).rev() {
            for c in (r + 1)..n {
                let t = &self.lu[(r, c)] * &y[c];
                y[r] -= &t;
            }
            y[r] = &y[r] / &self.lu[(r, r)];
        }
        Ok(Vector::new(y))
    }

    pub fn inverse(&self) -> Matrix {
        let prec = self.lu.data[0].precision();
        let mut inv = Matrix::zeros(self.n, self.n, prec);
        for c in 0..self.n {
            let mut e = Vector::zeros(self.n, prec);
            e[c] = prec.one();
            let col = self.solve(&e).expect("dimension checked");
            for r in 0..self.n {
                inv[(r, c)] = col[r].clone();
            }
        }
        inv
    }
}

/// Inverse of a square matrix; `SingularMatrix` when a pivot falls below
/// `10^(-digits/2)`.
pub fn lu_invert(m: &Matrix) -> Result<Matrix> {
    Lu::decompose(m).map(|lu| lu.inverse())
}

/// Solves `m·x = b`.
pub fn lu_solve(m: &Matrix, b: &Vector) -> Result<Vector> {
    Lu::decompose(m)?.solve(b)
}
