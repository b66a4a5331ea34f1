//! Expression AST, problem-file parser, and evaluation over scalars and jets.
//!
//! Problem files are line oriented:
//!
//! ```text
//! # comment
//! vars: x1 x2
//! eq: x1 - x2
//! eq: x1^2 + x2^2 - 2
//! start: 4 4
//! root: 1 1
//! ```
//!
//! Keys must appear in the order `vars`, `eq`..., `start`, `root`....
//! `^` takes a non-negative integer literal exponent; the callable functions
//! are `exp`, `log`, `sin`, `cos` and `sqrt`.

use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{Precision, Scalar, Vector};
use crate::taylor::{Elementary, TaylorPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        self.elementary().name()
    }

    fn elementary(self) -> Elementary {
        match self {
            Func::Exp => Elementary::Exp,
            Func::Log => Elementary::Log,
            Func::Sin => Elementary::Sin,
            Func::Cos => Elementary::Cos,
            Func::Sqrt => Elementary::Sqrt,
        }
    }

    fn apply_scalar(self, x: &Scalar) -> Result<Scalar> {
        match self {
            Func::Exp => Ok(x.exp()),
            Func::Log => x.ln(),
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Sqrt => x.sqrt(),
        }
    }
}

/// A numeric literal, kept in source form so it can be re-read at any
/// precision.
#[derive(Clone, Debug)]
pub struct Literal {
    text: String,
    value: Scalar,
}

impl Literal {
    pub fn text(&self) -> &str {
        &self.text
    }

    fn value_at(&self, prec: Precision) -> Scalar {
        if self.value.precision() == prec {
            self.value.clone()
        } else {
            prec.parse(&self.text)
                .expect("literal validated at parse time")
        }
    }
}

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Literal),
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    /// Parses one expression over the given variable names.
    pub fn parse(text: &str, vars: &[String], prec: Precision) -> Result<Expr> {
        parse_expression(text, vars, prec, 1)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => PREC_ATOM,
            Expr::Pow(..) => PREC_POW,
            Expr::Neg(_) => PREC_NEG,
            Expr::Binary(op, ..) => op.precedence(),
        }
    }

    /// Pretty-printer that resolves variable indices to names.
    pub fn display<'a>(&'a self, vars: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, vars }
    }

    pub fn eval_scalar(&self, point: &Vector) -> Result<Scalar> {
        let prec = point[0].precision();
        match self {
            Expr::Const(lit) => Ok(lit.value_at(prec)),
            Expr::Var(i) => Ok(point[*i].clone()),
            Expr::Neg(e) => Ok(-e.eval_scalar(point)?),
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval_scalar(point)?, b.eval_scalar(point)?);
                match op {
                    BinOp::Add => Ok(&a + &b),
                    BinOp::Sub => Ok(&a - &b),
                    BinOp::Mul => Ok(&a * &b),
                    BinOp::Div => a.checked_div(&b),
                }
            }
            Expr::Pow(base, n) => Ok(base.eval_scalar(point)?.powi(*n)),
            Expr::Call(f, arg) => f.apply_scalar(&arg.eval_scalar(point)?),
        }
    }

    pub fn eval_jet(&self, point: &Vector, max_degree: usize) -> Result<TaylorPoly> {
        let n = point.dim();
        let prec = point[0].precision();
        match self {
            Expr::Const(lit) => Ok(TaylorPoly::constant(lit.value_at(prec), n, max_degree)),
            Expr::Var(i) => TaylorPoly::variable(*i, point[*i].clone(), n, max_degree),
            Expr::Neg(e) => Ok(e.eval_jet(point, max_degree)?.neg()),
            Expr::Binary(op, a, b) => {
                let a = a.eval_jet(point, max_degree)?;
                let b = b.eval_jet(point, max_degree)?;
                match op {
                    BinOp::Add => a.add(&b),
                    BinOp::Sub => a.sub(&b),
                    BinOp::Mul => a.mul(&b),
                    BinOp::Div => a.div(&b),
                }
            }
            Expr::Pow(base, k) => base.eval_jet(point, max_degree)?.powi(*k),
            Expr::Call(f, arg) => arg.eval_jet(point, max_degree)?.compose(f.elementary()),
        }
    }

    /// Largest variable index referenced, if any.
    fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.max_var(),
            Expr::Binary(_, a, b) => a.max_var().max(b.max_var()),
        }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    vars: &'a [String],
}

impl ExprDisplay<'_> {
    fn child<'b>(&'b self, e: &'b Expr) -> ExprDisplay<'b> {
        ExprDisplay {
            expr: e,
            vars: self.vars,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
        if e.precedence() < min_prec {
            write!(f, "({})", self.child(e))
        } else {
            write!(f, "{}", self.child(e))
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr {
            Expr::Const(lit) => f.write_str(&lit.text),
            Expr::Var(i) => f.write_str(&self.vars[*i]),
            Expr::Neg(e) => {
                f.write_str("-")?;
                self.write_child(f, e, PREC_NEG)
            }
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                self.write_child(f, a, p)?;
                write!(f, " {} ", op.symbol())?;
                self.write_child(f, b, p + 1)
            }
            Expr::Pow(base, n) => {
                self.write_child(f, base, PREC_ATOM)?;
                write!(f, "^{n}")
            }
            Expr::Call(func, arg) => write!(f, "{}({})", func.name(), self.child(arg)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(String),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let err = |message: String| Error::Parse { line, message };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            tokens.push(Token::Number(chars[start..i].iter().collect()));
        } else if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            // indexed names such as `x[1]`
            if i < chars.len() && chars[i] == '[' {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j == i + 1 || j >= chars.len() || chars[j] != ']' {
                    return Err(err(format!("malformed indexed name near column {}", i + 1)));
                }
                i = j + 1;
            }
            tokens.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^".contains(c) {
            tokens.push(Token::Op(c));
            i += 1;
        } else if c == '(' {
            tokens.push(Token::LParen);
            i += 1;
        } else if c == ')' {
            tokens.push(Token::RParen);
            i += 1;
        } else {
            return Err(err(format!(
                "unexpected character `{c}` at column {}",
                i + 1
            )));
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    vars: &'a [String],
    prec: Precision,
    line: usize,
}

impl Parser<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat_op(&mut self, ops: &str) -> Option<char> {
        match self.peek() {
            Some(Token::Op(c)) if ops.contains(*c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expression(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op) = self.eat_op("+-") {
            let rhs = self.term()?;
            let op = if op == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.eat_op("*/") {
            let rhs = self.unary()?;
            let op = if op == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.eat_op("+-") {
            Some('-') => Ok(Expr::Neg(Box::new(self.unary()?))),
            Some(_) => self.unary(),
            None => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat_op("^").is_none() {
            return Ok(base);
        }
        // right-associative; the exponent must still reduce to a literal
        let exponent = self.power()?;
        match exponent {
            Expr::Const(lit) if lit.text.bytes().all(|b| b.is_ascii_digit()) => {
                let n: u32 = lit
                    .text
                    .parse()
                    .map_err(|_| self.err(format!("exponent `{}` too large", lit.text)))?;
                Ok(Expr::Pow(Box::new(base), n))
            }
            _ => Err(self.err("exponent of `^` must be a non-negative integer literal")),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Number(text)) => {
                let value = self
                    .prec
                    .parse(&text)
                    .map_err(|_| self.err(format!("malformed number `{text}`")))?;
                Ok(Expr::Const(Literal { text, value }))
            }
            Some(Token::Ident(name)) => {
                if self.peek() == Some(&Token::LParen) {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| self.err(format!("unknown function `{name}`")))?;
                    self.pos += 1;
                    let arg = self.expression()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Expr::Var(i)),
                    None => Err(Error::UnknownVariable {
                        line: self.line,
                        name,
                    }),
                }
            }
            Some(Token::LParen) => {
                let e = self.expression()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Some(t) => Err(self.err(format!("unexpected token {t:?}"))),
            None => Err(self.err("unexpected end of expression")),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        match self.next() {
            Some(Token::RParen) => Ok(()),
            _ => Err(self.err("expected `)`")),
        }
    }
}

fn parse_expression(text: &str, vars: &[String], prec: Precision, line: usize) -> Result<Expr> {
    let tokens = tokenize(text, line)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        vars,
        prec,
        line,
    };
    let e = parser.expression()?;
    if parser.pos < parser.tokens.len() {
        return Err(parser.err(format!(
            "unexpected trailing input {:?}",
            parser.tokens[parser.pos]
        )));
    }
    Ok(e)
}

/// A square system `f_i(x) = 0` with a start point.
#[derive(Clone, Debug)]
pub struct Problem {
    var_names: Vec<String>,
    equations: Vec<Expr>,
    start: Vector,
    known_roots: Vec<Vector>,
    precision: Precision,
}

impl Problem {
    pub fn new(
        var_names: Vec<String>,
        equations: Vec<Expr>,
        start: Vector,
        known_roots: Vec<Vector>,
    ) -> Result<Self> {
        let n = var_names.len();
        if n == 0 {
            return Err(Error::Parse {
                line: 0,
                message: "system declares no variables".into(),
            });
        }
        if equations.len() != n {
            return Err(Error::NonSquareSystem {
                equations: equations.len(),
                variables: n,
            });
        }
        if equations.iter().filter_map(Expr::max_var).any(|i| i >= n) {
            return Err(Error::DimensionMismatch(
                "equation references an undeclared variable".into(),
            ));
        }
        if start.dim() != n || known_roots.iter().any(|r| r.dim() != n) {
            return Err(Error::DimensionMismatch(format!(
                "points must have {n} coordinates"
            )));
        }
        let precision = start[0].precision();
        Ok(Self {
            var_names,
            equations,
            start,
            known_roots,
            precision,
        })
    }

    pub fn nvars(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn equations(&self) -> &[Expr] {
        &self.equations
    }

    pub fn start(&self) -> &Vector {
        &self.start
    }

    pub fn known_roots(&self) -> &[Vector] {
        &self.known_roots
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn with_start(mut self, start: Vector) -> Result<Self> {
        if start.dim() != self.nvars() {
            return Err(Error::DimensionMismatch("start point length".into()));
        }
        self.start = start;
        Ok(self)
    }

    pub fn with_root(mut self, root: Vector) -> Result<Self> {
        if root.dim() != self.nvars() {
            return Err(Error::DimensionMismatch("root length".into()));
        }
        self.known_roots.push(root);
        Ok(self)
    }

    /// `F(point)`.
    pub fn residual(&self, point: &Vector) -> Result<Vector> {
        self.equations
            .iter()
            .map(|e| e.eval_scalar(point))
            .collect()
    }

    /// Renders the problem back into the file format.
    pub fn to_file_string(&self) -> String {
        let mut out = format!("vars: {}\n", self.var_names.join(" "));
        for eq in &self.equations {
            out.push_str(&format!("eq: {}\n", eq.display(&self.var_names)));
        }
        let digits = self.precision.digits() as usize;
        let point = |v: &Vector| {
            v.iter()
                .map(|s| s.to_sci(digits, crate::numerics::Rounding::Nearest))
                .collect::<Vec<_>>()
                .join(" ")
        };
        out.push_str(&format!("start: {}\n", point(&self.start)));
        for r in &self.known_roots {
            out.push_str(&format!("root: {}\n", point(r)));
        }
        out
    }
}

#[derive(PartialEq, PartialOrd, Clone, Copy, Debug)]
enum Section {
    Begin,
    Vars,
    Eqs,
    Start,
    Roots,
}

/// Parses a problem file, reading all constants at precision `prec`.
pub fn parse_problem(text: &str, prec: Precision) -> Result<Problem> {
    let mut section = Section::Begin;
    let mut vars: Vec<String> = Vec::new();
    let mut equations = Vec::new();
    let mut start: Option<Vector> = None;
    let mut roots = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let perr = |message: String| Error::Parse { line, message };
        let (key, rest) = content
            .split_once(':')
            .ok_or_else(|| perr(format!("expected `key: value`, got `{content}`")))?;
        let (key, rest) = (key.trim(), rest.trim());
        let next = match key {
            "vars" => Section::Vars,
            "eq" => Section::Eqs,
            "start" => Section::Start,
            "root" => Section::Roots,
            other => return Err(perr(format!("unknown key `{other}`"))),
        };
        let repeatable = matches!(next, Section::Eqs | Section::Roots);
        if next < section || (next == section && !repeatable) {
            return Err(perr(format!(
                "`{key}` out of order; expected vars, eq..., start, root..."
            )));
        }
        if next > Section::Vars && vars.is_empty() {
            return Err(perr("`vars:` must come first".into()));
        }
        section = next;
        match next {
            Section::Vars => {
                for name in rest.split_whitespace() {
                    let valid = tokenize(name, line)
                        .map(|t| matches!(t.as_slice(), [Token::Ident(_)]))
                        .unwrap_or(false);
                    if !valid || Func::from_name(name).is_some() {
                        return Err(perr(format!("invalid variable name `{name}`")));
                    }
                    if vars.iter().any(|v| v == name) {
                        return Err(perr(format!("duplicate variable `{name}`")));
                    }
                    vars.push(name.to_string());
                }
                if vars.is_empty() {
                    return Err(perr("`vars:` lists no variables".into()));
                }
            }
            Section::Eqs => equations.push(parse_expression(rest, &vars, prec, line)?),
            Section::Start | Section::Roots => {
                if equations.len() != vars.len() {
                    return Err(Error::NonSquareSystem {
                        equations: equations.len(),
                        variables: vars.len(),
                    });
                }
                let fields: Vec<&str> = rest.split_whitespace().collect();
                if fields.len() != vars.len() {
                    return Err(perr(format!(
                        "expected {} coordinates, got {}",
                        vars.len(),
                        fields.len()
                    )));
                }
                let point =
                    Vector::from_decimals(&fields, prec).map_err(|e| perr(e.to_string()))?;
                if next == Section::Start {
                    start = Some(point);
                } else {
                    roots.push(point);
                }
            }
            Section::Begin => unreachable!(),
        }
    }

    if vars.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "missing `vars:` line".into(),
        });
    }
    if equations.len() != vars.len() {
        return Err(Error::NonSquareSystem {
            equations: equations.len(),
            variables: vars.len(),
        });
    }
    let start = start.ok_or(Error::MissingStart)?;
    Problem::new(vars, equations, start, roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    const INCAS: &str = "\
# two-variable test system
vars: x1 x2
eq: x1 - x2
eq: x1^2 + x2^2 - 2
start: 4 4
root: 1 1
root: -1 -1
";

    fn prec() -> Precision {
        Precision::new(50).unwrap()
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn point(vals: &[&str]) -> Vector {
        Vector::from_decimals(vals, prec()).unwrap()
    }

    #[test]
    fn parses_two_variable_system() {
        let p = parse_problem(INCAS, prec()).unwrap();
        assert_eq!(p.nvars(), 2);
        assert_eq!(p.var_names(), &["x1", "x2"]);
        assert_eq!(p.start(), &point(&["4", "4"]));
        assert_eq!(p.known_roots().len(), 2);
        assert_eq!(
            p.equations()[0].display(p.var_names()).to_string(),
            "x1 - x2"
        );
        assert_eq!(
            p.equations()[1].display(p.var_names()).to_string(),
            "x1^2 + x2^2 - 2"
        );
    }

    #[test]
    fn rejects_non_square() {
        let text = "vars: a b c\neq: a\neq: b\nstart: 1 2 3\n";
        assert_eq!(
            parse_problem(text, prec()).unwrap_err(),
            Error::NonSquareSystem {
                equations: 2,
                variables: 3
            }
        );
    }

    #[test]
    fn rejects_unknown_variable() {
        let text = "vars: x\neq: x + y\nstart: 1\n";
        assert_eq!(
            parse_problem(text, prec()).unwrap_err(),
            Error::UnknownVariable {
                line: 2,
                name: "y".into()
            }
        );
    }

    #[test]
    fn structural_errors_carry_line_numbers() {
        let missing_start = "vars: x\neq: x - 1\n";
        assert_eq!(
            parse_problem(missing_start, prec()).unwrap_err(),
            Error::MissingStart
        );

        let cases = [
            ("vars: x\neq: x - \nstart: 1\n", 2),
            ("eq: x\n", 1),
            ("vars: x\neq: x^x\nstart: 1\n", 2),
            ("vars: x\neq: x^2.5\nstart: 1\n", 2),
            ("vars: x\neq: foo(x)\nstart: 1\n", 2),
            ("vars: x\neq: x\nstart: 1 2\n", 3),
            ("vars: x\neq: x\nstart: abc\n", 3),
            ("vars: x x\n", 1),
            ("vars: x\neq: x\nstart: 1\nstart: 2\n", 4),
            ("vars: x\nbogus: 1\n", 2),
            ("vars: x\neq: (x\nstart: 1\n", 2),
            ("vars: x\neq: x $ 1\nstart: 1\n", 2),
        ];
        assert!(matches!(
            parse_problem("vars: x\nstart: 1\neq: x\n", prec()),
            Err(Error::NonSquareSystem {
                equations: 0,
                variables: 1
            })
        ));
        for (text, line) in cases {
            match parse_problem(text, prec()) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let vars = names(&["x", "y"]);
        let p = |s: &str| Expr::parse(s, &vars, prec()).unwrap();
        let at = point(&["3", "2"]);
        let ev = |s: &str| p(s).eval_scalar(&at).unwrap();
        assert_eq!(ev("-x^2"), prec().from_i64(-9));
        assert_eq!(ev("(-x)^2"), prec().from_i64(9));
        assert_eq!(ev("x - y - 1"), prec().from_i64(0));
        assert_eq!(ev("12 / x / y"), prec().from_i64(2));
        assert_eq!(ev("2 + 3 * x^2"), prec().from_i64(29));
        assert_eq!(ev("x^0"), prec().from_i64(1));
        assert_eq!(ev("--x"), prec().from_i64(3));
        assert_eq!(ev("+x"), prec().from_i64(3));
        assert!(Expr::parse("x^-1", &vars, prec()).is_err());
        assert!(Expr::parse("x^2^3", &vars, prec()).is_err());
    }

    #[test]
    fn indexed_names_and_functions() {
        let text = "vars: x[1] x[2] x[3]\neq: x[1]+2*x[2]+x[3]\neq: 2*x[1]-x[2]-x[3]\neq: x[1]^2+x[2]^2+x[3]^2-3\nstart: 2.1 2.2 -1\n";
        let p = parse_problem(text, prec()).unwrap();
        assert_eq!(p.nvars(), 3);
        let f = p.residual(p.start()).unwrap();
        assert_eq!(f[0], prec().parse("5.5").unwrap());

        let vars = names(&["t"]);
        let e = Expr::parse("exp(t) + ln(t) - sqrt(t) * sin(t) / cos(t)", &vars, prec()).unwrap();
        let one = point(&["1"]);
        let expected =
            &(&prec().one().exp() + &prec().zero()) - &(&prec().one().sin() / &prec().one().cos());
        assert_eq!(e.eval_scalar(&one).unwrap(), expected);
    }

    #[test]
    fn scalar_evaluation() {
        let p = parse_problem(INCAS, prec()).unwrap();
        let eqs = p.equations();
        assert_eq!(
            eqs[1].eval_scalar(&point(&["4", "4"])).unwrap(),
            prec().from_i64(30)
        );
        assert_eq!(
            eqs[1].eval_scalar(&point(&["1", "1"])).unwrap(),
            prec().zero()
        );
        for c in ["0", "-2.5", "17.25", "1e-30"] {
            assert!(eqs[0].eval_scalar(&point(&[c, c])).unwrap().is_zero());
        }
    }

    #[test]
    fn evaluation_errors() {
        let vars = names(&["x"]);
        let at0 = point(&["0"]);
        let div = Expr::parse("1 / x", &vars, prec()).unwrap();
        assert_eq!(div.eval_scalar(&at0), Err(Error::DivisionByZero));
        assert_eq!(div.eval_jet(&at0, 2), Err(Error::DivisionByZeroJet));
        let lg = Expr::parse("log(x - 1)", &vars, prec()).unwrap();
        assert!(matches!(lg.eval_scalar(&at0), Err(Error::Domain { .. })));
        assert!(matches!(lg.eval_jet(&at0, 2), Err(Error::Domain { .. })));
        let sq = Expr::parse("sqrt(x - 1)", &vars, prec()).unwrap();
        assert!(matches!(sq.eval_scalar(&at0), Err(Error::Domain { .. })));
    }

    #[test]
    fn jet_evaluation() {
        let p = parse_problem(INCAS, prec()).unwrap();
        let at = point(&["4", "4"]);
        let jet = p.equations()[1].eval_jet(&at, 2).unwrap();
        assert_eq!(jet.constant_term(), &prec().from_i64(30));
        assert_eq!(
            jet.derivative_tensor(1).unwrap().entries(),
            &[prec().from_i64(8), prec().from_i64(8)]
        );
        let h = jet.derivative_tensor(2).unwrap();
        assert_eq!(h.get(&[0, 0]), &prec().from_i64(2));
        assert_eq!(h.get(&[1, 1]), &prec().from_i64(2));

        let affine = Expr::parse("3*x1 - 2*x2 + 7", p.var_names(), prec()).unwrap();
        let j = affine.eval_jet(&at, 3).unwrap();
        assert!(j
            .terms()
            .filter(|(m, _)| m.degree() >= 2)
            .all(|(_, c)| c.is_zero()));

        let constant = Expr::parse("2 * 3.5", p.var_names(), prec()).unwrap();
        let j = constant.eval_jet(&at, 2).unwrap();
        assert_eq!(j.constant_term(), &prec().from_i64(7));
        assert!(j.terms().skip(1).all(|(_, c)| c.is_zero()));
    }

    #[test]
    fn file_round_trip() {
        let p = parse_problem(INCAS, prec()).unwrap();
        let again = parse_problem(&p.to_file_string(), prec()).unwrap();
        assert_eq!(again.equations(), p.equations());
        assert_eq!(again.start(), p.start());
        assert_eq!(again.known_roots(), p.known_roots());
    }
}
