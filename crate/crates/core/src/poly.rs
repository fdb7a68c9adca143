//! Homogeneous polynomials in `n+1` variables and the linear algebra of
//! graded pieces.
//!
//! A degree-`d` graded piece of `k[x0..xn]` is spanned by the monomials of
//! total degree `d`, listed in graded reverse-lexicographic order (largest
//! first). That order is part of the external contract: every matrix produced
//! here is written with respect to it. Negative-degree pieces are
//! zero-dimensional spaces, never errors.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::ExactMatrix;
use crate::scalar::{FieldSpec, Scalar};

/// Exponent tuple of a monomial; length is the variable count `n+1`.
pub type Exponents = Vec<u32>;

/// Compares two same-length exponent tuples in graded reverse-lexicographic
/// order: higher total degree wins; on equal degrees the tuple whose last
/// differing entry is smaller is the larger monomial.
pub fn grevlex_cmp(a: &[u32], b: &[u32]) -> Ordering {
    let da: u64 = a.iter().map(|&e| e as u64).sum();
    let db: u64 = b.iter().map(|&e| e as u64).sum();
    match da.cmp(&db) {
        Ordering::Equal => {}
        ord => return ord,
    }
    for i in (0..a.len()).rev() {
        match a[i].cmp(&b[i]) {
            Ordering::Equal => continue,
            // Smaller last differing exponent means larger monomial.
            Ordering::Less => return Ordering::Greater,
            Ordering::Greater => return Ordering::Less,
        }
    }
    Ordering::Equal
}

/// All exponent tuples of `n+1` non-negative integers summing to `d`, in
/// descending grevlex order. Empty when `d < 0`; for `d >= 0` the length is
/// `C(n+d, n)`.
pub fn monomial_basis(n: usize, d: i64) -> Vec<Exponents> {
    if d < 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut current = vec![0u32; n + 1];
    gen_exponents(n + 1, 0, d as u32, &mut current, &mut out);
    out.sort_by(|a, b| grevlex_cmp(b, a));
    out
}

fn gen_exponents(nvars: usize, pos: usize, remaining: u32, current: &mut Exponents, out: &mut Vec<Exponents>) {
    if pos == nvars - 1 {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for e in 0..=remaining {
        current[pos] = e;
        gen_exponents(nvars, pos + 1, remaining - e, current, out);
    }
    current[pos] = 0;
}

/// Dimension of the degree-`d` graded piece in `n+1` variables: `C(n+d, n)`
/// for `d >= 0`, zero otherwise.
pub fn graded_dim(n: usize, d: i64) -> usize {
    if d < 0 {
        return 0;
    }
    binomial(n as i64 + d, n as i64) as usize
}

/// `C(n, k)` for integer `n`, with the convention that the result is zero
/// when `n < 0` (as a count) or `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> i64 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// A homogeneous polynomial of a fixed total degree.
///
/// The zero polynomial is representable at every degree, including negative
/// ones (where it is the only element).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogPoly {
    /// Variable count minus one: the polynomial lives in `k[x0..xn]`.
    pub n: usize,
    /// Total degree; every stored exponent tuple sums to it.
    pub degree: i64,
    coeffs: BTreeMap<Exponents, Scalar>,
}

impl HomogPoly {
    pub fn zero(n: usize, degree: i64) -> Self {
        HomogPoly {
            n,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    /// The constant polynomial `c` (degree 0).
    pub fn constant(n: usize, c: Scalar) -> Self {
        let mut p = HomogPoly::zero(n, 0);
        p.add_term(vec![0; n + 1], c);
        p
    }

    /// The variable `x_i` as a degree-1 polynomial.
    pub fn variable(n: usize, i: usize) -> Self {
        assert!(i <= n, "variable index out of range");
        let mut exps = vec![0u32; n + 1];
        exps[i] = 1;
        let mut p = HomogPoly::zero(n, 1);
        p.add_term(exps, Scalar::one());
        p
    }

    pub fn from_terms(n: usize, degree: i64, terms: Vec<(Exponents, Scalar)>) -> Self {
        let mut p = HomogPoly::zero(n, degree);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Adds `c * x^exps`, merging with any existing term and dropping zeros.
    pub fn add_term(&mut self, exps: Exponents, c: Scalar) {
        assert_eq!(exps.len(), self.n + 1, "exponent tuple length mismatch");
        let total: i64 = exps.iter().map(|&e| e as i64).sum();
        assert_eq!(total, self.degree, "term degree mismatch");
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(exps);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// A nonzero constant (degree 0, one term); these are the entries prune
    /// eliminates.
    pub fn as_nonzero_constant(&self) -> Option<&Scalar> {
        if self.degree == 0 && self.coeffs.len() == 1 {
            self.coeffs.values().next().filter(|c| !c.is_zero())
        } else {
            None
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Scalar)> {
        self.coeffs.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, exps: &[u32]) -> Scalar {
        self.coeffs.get(exps).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn scale(&self, c: &Scalar) -> HomogPoly {
        if c.is_zero() {
            return HomogPoly::zero(self.n, self.degree);
        }
        let mut out = HomogPoly::zero(self.n, self.degree);
        for (e, a) in &self.coeffs {
            out.add_term(e.clone(), a * c);
        }
        out
    }

    pub fn add(&self, other: &HomogPoly) -> HomogPoly {
        assert_eq!(self.n, other.n);
        assert_eq!(self.degree, other.degree, "adding different degrees");
        let mut out = self.clone();
        for (e, c) in &other.coeffs {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &HomogPoly) -> HomogPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> HomogPoly {
        let mut out = HomogPoly::zero(self.n, self.degree);
        for (e, c) in &self.coeffs {
            out.add_term(e.clone(), -c);
        }
        out
    }

    pub fn mul(&self, other: &HomogPoly) -> HomogPoly {
        assert_eq!(self.n, other.n);
        let mut out = HomogPoly::zero(self.n, self.degree + other.degree);
        if self.is_zero() || other.is_zero() {
            return out;
        }
        for (ea, ca) in &self.coeffs {
            for (eb, cb) in &other.coeffs {
                let exps: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(exps, ca * cb);
            }
        }
        out
    }

    /// Maps every coefficient into `field`.
    pub fn to_field(&self, field: FieldSpec) -> Result<HomogPoly> {
        let mut out = HomogPoly::zero(self.n, self.degree);
        for (e, c) in &self.coeffs {
            out.add_term(e.clone(), c.to_field(field)?);
        }
        Ok(out)
    }

    /// Coefficient column vector with respect to `monomial_basis(n, degree)`.
    pub fn coeff_vector(&self) -> Vec<Scalar> {
        monomial_basis(self.n, self.degree)
            .iter()
            .map(|m| self.coeff(m))
            .collect()
    }

    /// Rebuilds a polynomial from coordinates in the monomial basis.
    pub fn from_coeff_vector(n: usize, degree: i64, coords: &[Scalar]) -> HomogPoly {
        let basis = monomial_basis(n, degree);
        assert_eq!(basis.len(), coords.len(), "coordinate length mismatch");
        let mut p = HomogPoly::zero(n, degree);
        for (m, c) in basis.into_iter().zip(coords) {
            p.add_term(m, c.clone());
        }
        p
    }
}

/// Matrix of "multiply by `f`" from the degree-`d` graded piece to the
/// degree-`d + deg f` piece, with respect to the grevlex monomial bases. The
/// shape is `C(n+d+e, n) x C(n+d, n)`; zero-size matrices appear when a piece
/// is empty.
pub fn multiplication_matrix(f: &HomogPoly, d: i64) -> ExactMatrix {
    let n = f.n;
    let src = monomial_basis(n, d);
    let tgt = monomial_basis(n, d + f.degree);
    let mut index = BTreeMap::new();
    for (i, m) in tgt.iter().enumerate() {
        index.insert(m.clone(), i);
    }
    let mut m = ExactMatrix::zeros(tgt.len(), src.len());
    for (c, mono) in src.iter().enumerate() {
        for (e, coeff) in f.terms() {
            let prod: Exponents = mono.iter().zip(e).map(|(a, b)| a + b).collect();
            let r = index[&prod];
            m.set(r, c, m.get(r, c) + coeff.clone());
        }
    }
    m
}

impl fmt::Display for HomogPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // Print in descending grevlex order.
        let mut terms: Vec<(&Exponents, &Scalar)> = self.coeffs.iter().collect();
        terms.sort_by(|a, b| grevlex_cmp(b.0, a.0));
        let mut first = true;
        for (e, c) in terms {
            let neg = matches!(c, Scalar::Q(r) if r < &num_rational::BigRational::from_integer(0.into()));
            let mag = if neg { -c } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || e.iter().all(|&x| x == 0) {
                factors.push(format!("{mag}"));
            }
            for (i, &exp) in e.iter().enumerate() {
                if exp == 1 {
                    factors.push(format!("x{i}"));
                } else if exp > 1 {
                    factors.push(format!("x{i}^{exp}"));
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// Parses the CLI polynomial syntax: terms like `3/2*x0^2*x1` joined by `+`
/// or `-`, with integer or `a/b` coefficients and insignificant whitespace.
///
/// `expected_degree` fixes the homogeneous degree; a literal `0` parses at
/// any degree, and every nonzero term must have total degree equal to it.
pub fn parse_poly(input: &str, n: usize, expected_degree: i64) -> Result<HomogPoly> {
    let mut p = HomogPoly::zero(n, expected_degree);
    let tokens = tokenize(input)?;
    if tokens.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let mut pos = 0;
    let mut sign = Scalar::one();
    // Leading sign.
    if let Some(Token::Op(c)) = tokens.get(pos) {
        if *c == '-' {
            sign = -&sign;
        }
        pos += 1;
    }
    loop {
        let (coeff, exps, next) = parse_term(&tokens, pos, n)?;
        let total: i64 = exps.iter().map(|&e| e as i64).sum();
        let value = &coeff * &sign;
        if !value.is_zero() {
            if total != expected_degree {
                return Err(Error::Parse(format!(
                    "term of degree {total} in `{input}` where degree {expected_degree} is required"
                )));
            }
            p.add_term(exps, value);
        }
        pos = next;
        match tokens.get(pos) {
            None => break,
            Some(Token::Op('+')) => {
                sign = Scalar::one();
                pos += 1;
            }
            Some(Token::Op('-')) => {
                sign = -Scalar::one();
                pos += 1;
            }
            Some(t) => {
                return Err(Error::Parse(format!(
                    "expected `+` or `-` before `{t:?}` in `{input}`"
                )))
            }
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(i64),
    Var(usize),
    Op(char), // + - * / ^
}

fn tokenize(input: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("integer out of range: {s}")))?;
            out.push(Token::Num(v));
        } else if c == 'x' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if j == start {
                return Err(Error::Parse(format!(
                    "variable name without index at offset {i} in `{input}`"
                )));
            }
            let s: String = chars[start..j].iter().collect();
            out.push(Token::Var(s.parse::<usize>().unwrap()));
            i = j;
        } else if "+-*/^".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!(
                "unexpected character `{c}` at offset {i} in `{input}`"
            )));
        }
    }
    Ok(out)
}

/// Parses one product of factors starting at `pos`; returns the coefficient,
/// exponent tuple and the index after the term.
fn parse_term(tokens: &[Token], mut pos: usize, n: usize) -> Result<(Scalar, Exponents, usize)> {
    let mut coeff = Scalar::one();
    let mut exps = vec![0u32; n + 1];
    loop {
        match tokens.get(pos) {
            Some(Token::Num(v)) => {
                let mut c = Scalar::from_int(*v);
                pos += 1;
                if let Some(Token::Op('/')) = tokens.get(pos) {
                    match tokens.get(pos + 1) {
                        Some(Token::Num(d)) if *d != 0 => {
                            c = Scalar::from_ratio(*v, *d);
                            pos += 2;
                        }
                        _ => return Err(Error::Parse("malformed rational coefficient".into())),
                    }
                }
                coeff = &coeff * &c;
            }
            Some(Token::Var(idx)) => {
                if *idx > n {
                    return Err(Error::Parse(format!(
                        "variable x{idx} out of range for {} variables",
                        n + 1
                    )));
                }
                let mut e: u32 = 1;
                pos += 1;
                if let Some(Token::Op('^')) = tokens.get(pos) {
                    match tokens.get(pos + 1) {
                        Some(Token::Num(v)) if *v >= 0 => {
                            e = *v as u32;
                            pos += 2;
                        }
                        _ => return Err(Error::Parse("malformed exponent".into())),
                    }
                }
                exps[*idx] += e;
            }
            _ => {
                return Err(Error::Parse("expected a coefficient or variable".into()));
            }
        }
        if let Some(Token::Op('*')) = tokens.get(pos) {
            pos += 1;
            continue;
        }
        break;
    }
    Ok((coeff, exps, pos))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_sizes_and_order() {
        // Constants on P^1.
        assert_eq!(monomial_basis(1, 0), vec![vec![0, 0]]);
        // {x0^2, x0 x1, x1^2}.
        assert_eq!(monomial_basis(1, 2).len(), 3);
        assert_eq!(
            monomial_basis(1, 2),
            vec![vec![2, 0], vec![1, 1], vec![0, 2]]
        );
        // All six degree-2 monomials in 3 variables.
        assert_eq!(monomial_basis(2, 2).len(), 6);
        // Negative degree pieces are empty, not errors.
        assert!(monomial_basis(3, -2).is_empty());
    }

    #[test]
    fn basis_count_matches_binomial() {
        for n in 0..=3usize {
            for d in 0..=6i64 {
                assert_eq!(
                    monomial_basis(n, d).len() as i64,
                    binomial(n as i64 + d, n as i64),
                    "n={n} d={d}"
                );
            }
        }
    }

    #[test]
    fn grevlex_order_on_p2_degree_2() {
        // Descending grevlex: x0^2, x0x1, x1^2, x0x2, x1x2, x2^2.
        let expect: Vec<Exponents> = vec![
            vec![2, 0, 0],
            vec![1, 1, 0],
            vec![0, 2, 0],
            vec![1, 0, 1],
            vec![0, 1, 1],
            vec![0, 0, 2],
        ];
        assert_eq!(monomial_basis(2, 2), expect);
    }

    #[test]
    fn multiplication_by_zero_is_zero_matrix() {
        let z = HomogPoly::zero(1, 1);
        let m = multiplication_matrix(&z, 3);
        assert_eq!(m.rows(), 5);
        assert_eq!(m.cols(), 4);
        assert!(m.is_zero());
    }

    #[test]
    fn multiplication_by_x0_from_constants() {
        // x0 * 1 = x0, expanded in the basis {x0, x1}: column (1, 0)^T.
        let f = HomogPoly::variable(1, 0);
        let m = multiplication_matrix(&f, 0);
        assert_eq!((m.rows(), m.cols()), (2, 1));
        assert_eq!(m.get(0, 0), Scalar::one());
        assert_eq!(m.get(1, 0), Scalar::zero());
    }

    #[test]
    fn multiplication_matrix_expands_products() {
        // f = x0 + x1 acting on degree 1: columns are x0(x0+x1), x1(x0+x1).
        let f = HomogPoly::variable(1, 0).add(&HomogPoly::variable(1, 1));
        let m = multiplication_matrix(&f, 1);
        assert_eq!((m.rows(), m.cols()), (3, 2));
        // Basis of degree 2: x0^2, x0x1, x1^2.
        let col0: Vec<Scalar> = (0..3).map(|r| m.get(r, 0)).collect();
        let col1: Vec<Scalar> = (0..3).map(|r| m.get(r, 1)).collect();
        assert_eq!(col0, vec![Scalar::one(), Scalar::one(), Scalar::zero()]);
        assert_eq!(col1, vec![Scalar::zero(), Scalar::one(), Scalar::one()]);
    }

    #[test]
    fn multiplication_matrices_compose() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 1..=2usize {
            for _ in 0..8 {
                let f = random_poly(n, rng.gen_range(0..=2), &mut rng);
                let g = random_poly(n, rng.gen_range(0..=2), &mut rng);
                let d = rng.gen_range(0..=2i64);
                let lhs = multiplication_matrix(&f.mul(&g), d);
                let rhs = multiplication_matrix(&f, d + g.degree)
                    .mul(&multiplication_matrix(&g, d));
                assert_eq!(lhs, rhs);
            }
        }
    }

    fn random_poly(n: usize, degree: i64, rng: &mut impl rand::Rng) -> HomogPoly {
        let mut p = HomogPoly::zero(n, degree);
        for m in monomial_basis(n, degree) {
            p.add_term(m, Scalar::from_int(rng.gen_range(-3..=3)));
        }
        p
    }

    #[test]
    fn parse_round_trip() {
        let p = parse_poly("3/2*x0^2*x1 - x1^3 + 2*x0*x1*x2", 2, 3).unwrap();
        assert_eq!(p.num_terms(), 3);
        assert_eq!(p.coeff(&[2, 1, 0]), Scalar::from_ratio(3, 2));
        assert_eq!(p.coeff(&[0, 3, 0]), Scalar::from_int(-1));
        let shown = format!("{p}");
        let q = parse_poly(&shown, 2, 3).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn parse_zero_at_any_degree() {
        assert!(parse_poly("0", 1, 5).unwrap().is_zero());
        assert!(parse_poly("0", 1, -2).unwrap().is_zero());
    }

    #[test]
    fn parse_rejects_wrong_degree_and_bad_vars() {
        assert!(parse_poly("x0*x1", 1, 1).is_err());
        assert!(parse_poly("x5", 1, 1).is_err());
        assert!(parse_poly("x0 + ", 1, 1).is_err());
        assert!(parse_poly("3y", 1, 1).is_err());
    }

    #[test]
    fn display_uses_cli_syntax() {
        let p = parse_poly("-x0 + 1/2 * x1", 1, 1).unwrap();
        assert_eq!(format!("{p}"), "-x0 + 1/2*x1");
    }
}
