//! Bounded complexes of line-bundle sums with polynomial-matrix
//! differentials, and the structural operations on them.
//!
//! Conventions, fixed once and checked by [`LineBundleComplex::validate`] on
//! every constructor output:
//!
//! * differentials raise cohomological degree, `d^i : C^i -> C^{i+1}`;
//! * matrices act on column vectors from the left, so entry `(r, c)` of
//!   `d^i` is a homogeneous polynomial of degree
//!   `term(i+1)[r] - term(i)[c]`;
//! * `shift(k)` multiplies differentials by `(-1)^k`;
//! * the cone of `f : A -> B` has `C^i = A^{i+1} (+) B^i` with differential
//!   blocks `(-d_A, 0; f, d_B)`;
//! * `tensor` uses Koszul signs `(-1)^i` on the second factor's
//!   differential;
//! * `dual` transposes differentials with no extra sign, which makes
//!   `dual(dual(C)) = C` hold on the nose.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::poly::HomogPoly;
use crate::scalar::{FieldSpec, Scalar};

/// The line bundle `O(d)` on `P^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Twist(pub i64);

/// A formal direct sum of twists; the order indexes matrix rows and columns.
/// The empty sum is the zero object.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FreeTerm(pub Vec<Twist>);

impl FreeTerm {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn twist(&self, i: usize) -> Twist {
        self.0[i]
    }
}

/// A dense matrix of homogeneous polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<HomogPoly>, // row-major
}

impl PolyMatrix {
    /// Zero matrix between the graded free modules given by `source` and
    /// `target` twist lists; entry degrees are forced by the twists.
    pub fn zero_map(n: usize, target: &FreeTerm, source: &FreeTerm) -> Self {
        let mut entries = Vec::with_capacity(target.len() * source.len());
        for r in 0..target.len() {
            for c in 0..source.len() {
                entries.push(HomogPoly::zero(n, target.twist(r).0 - source.twist(c).0));
            }
        }
        PolyMatrix {
            rows: target.len(),
            cols: source.len(),
            entries,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> HomogPoly) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        PolyMatrix { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &HomogPoly {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: HomogPoly) {
        self.entries[r * self.cols + c] = p;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|p| p.is_zero())
    }

    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in composition");
        PolyMatrix::from_fn(self.rows, other.cols, |r, c| {
            let mut acc: Option<HomogPoly> = None;
            for k in 0..self.cols {
                let a = self.get(r, k);
                let b = other.get(k, c);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                let prod = a.mul(b);
                acc = Some(match acc {
                    None => prod,
                    Some(s) => s.add(&prod),
                });
            }
            acc.unwrap_or_else(|| {
                let deg = if self.cols > 0 {
                    self.get(r, 0).degree + other.get(0, c).degree
                } else {
                    0
                };
                HomogPoly::zero(self.nvars(), deg)
            })
        })
    }

    fn nvars(&self) -> usize {
        self.entries.first().map_or(0, |p| p.n)
    }

    pub fn scale(&self, s: &Scalar) -> PolyMatrix {
        PolyMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).scale(s))
    }

    pub fn transpose(&self) -> PolyMatrix {
        PolyMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn remove_row(&self, row: usize) -> PolyMatrix {
        PolyMatrix::from_fn(self.rows - 1, self.cols, |r, c| {
            self.get(if r < row { r } else { r + 1 }, c).clone()
        })
    }

    pub fn remove_col(&self, col: usize) -> PolyMatrix {
        PolyMatrix::from_fn(self.rows, self.cols - 1, |r, c| {
            self.get(r, if c < col { c } else { c + 1 }).clone()
        })
    }

    pub fn to_field(&self, field: FieldSpec) -> Result<PolyMatrix> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for p in &self.entries {
            entries.push(p.to_field(field)?);
        }
        Ok(PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }
}

/// A violation found by `validate`, pointing at the first offending degree
/// and entry.
#[derive(Debug, Clone)]
pub struct Violation {
    pub degree: i64,
    pub entry: Option<(usize, usize)>,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.entry {
            Some((r, c)) => write!(f, "at degree {}, entry ({r}, {c}): {}", self.degree, self.reason),
            None => write!(f, "at degree {}: {}", self.degree, self.reason),
        }
    }
}

impl From<Violation> for Error {
    fn from(v: Violation) -> Error {
        Error::Validation(v.to_string())
    }
}

/// A bounded complex of direct sums of line-bundle twists on `P^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineBundleComplex {
    n: usize,
    terms: BTreeMap<i64, FreeTerm>,
    diffs: BTreeMap<i64, PolyMatrix>,
}

impl LineBundleComplex {
    /// Builds a complex from explicit data. Shapes are checked here; the
    /// homological invariants are checked by [`Self::validate`].
    pub fn new(
        n: usize,
        terms: BTreeMap<i64, FreeTerm>,
        diffs: BTreeMap<i64, PolyMatrix>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("ambient dimension must be at least 1".into()));
        }
        let mut c = LineBundleComplex { n, terms, diffs };
        for (&i, d) in &c.diffs {
            let rows = c.terms.get(&(i + 1)).map_or(0, FreeTerm::len);
            let cols = c.terms.get(&i).map_or(0, FreeTerm::len);
            if d.rows() != rows || d.cols() != cols {
                return Err(Error::Validation(format!(
                    "differential at degree {i} is {}x{}, expected {rows}x{cols}",
                    d.rows(),
                    d.cols()
                )));
            }
        }
        c.normalize();
        Ok(c)
    }

    /// The zero object.
    pub fn zero(n: usize) -> Self {
        LineBundleComplex {
            n,
            terms: BTreeMap::new(),
            diffs: BTreeMap::new(),
        }
    }

    /// `O(d)` placed in cohomological degree 0.
    pub fn line_bundle(n: usize, d: i64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(0, FreeTerm(vec![Twist(d)]));
        LineBundleComplex {
            n,
            terms,
            diffs: BTreeMap::new(),
        }
    }

    /// The structure sheaf `O` in degree 0.
    pub fn structure_sheaf(n: usize) -> Self {
        Self::line_bundle(n, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn term(&self, i: i64) -> FreeTerm {
        self.terms.get(&i).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> &BTreeMap<i64, FreeTerm> {
        &self.terms
    }

    pub fn diffs(&self) -> &BTreeMap<i64, PolyMatrix> {
        &self.diffs
    }

    /// The differential `d^i`, materializing a zero matrix when absent.
    pub fn diff(&self, i: i64) -> PolyMatrix {
        match self.diffs.get(&i) {
            Some(d) => d.clone(),
            None => PolyMatrix::zero_map(self.n, &self.term(i + 1), &self.term(i)),
        }
    }

    pub fn is_zero_complex(&self) -> bool {
        self.terms.is_empty()
    }

    /// Degrees with a nonzero term, in ascending order.
    pub fn support(&self) -> Vec<i64> {
        self.terms.keys().copied().collect()
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Total number of line-bundle summands across all degrees.
    pub fn total_summands(&self) -> usize {
        self.terms.values().map(FreeTerm::len).sum()
    }

    /// Smallest and largest twist appearing anywhere, if any.
    pub fn twist_range(&self) -> Option<(i64, i64)> {
        let mut range: Option<(i64, i64)> = None;
        for t in self.terms.values() {
            for &Twist(d) in &t.0 {
                range = Some(match range {
                    None => (d, d),
                    Some((lo, hi)) => (lo.min(d), hi.max(d)),
                });
            }
        }
        range
    }

    fn normalize(&mut self) {
        self.terms.retain(|_, t| !t.is_empty());
        let terms = &self.terms;
        self.diffs.retain(|i, d| {
            !d.is_zero() && terms.contains_key(i) && terms.contains_key(&(i + 1))
        });
    }

    /// Checks all structural invariants: matching shapes, homogeneity of
    /// every entry against the twist difference (entries that would need
    /// negative degree must be zero), and `d . d = 0`. Reports the first
    /// violation.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        for (&i, d) in &self.diffs {
            let tgt = self.term(i + 1);
            let src = self.term(i);
            if d.rows() != tgt.len() || d.cols() != src.len() {
                return Err(Violation {
                    degree: i,
                    entry: None,
                    reason: format!(
                        "differential is {}x{}, expected {}x{}",
                        d.rows(),
                        d.cols(),
                        tgt.len(),
                        src.len()
                    ),
                });
            }
            for r in 0..d.rows() {
                for c in 0..d.cols() {
                    let need = tgt.twist(r).0 - src.twist(c).0;
                    let entry = d.get(r, c);
                    if entry.degree != need {
                        return Err(Violation {
                            degree: i,
                            entry: Some((r, c)),
                            reason: format!(
                                "entry has degree {}, twists require {need}",
                                entry.degree
                            ),
                        });
                    }
                    if need < 0 && !entry.is_zero() {
                        return Err(Violation {
                            degree: i,
                            entry: Some((r, c)),
                            reason: "nonzero entry where negative degree forces zero".into(),
                        });
                    }
                    if entry.n != self.n {
                        return Err(Violation {
                            degree: i,
                            entry: Some((r, c)),
                            reason: format!(
                                "entry in {} variables, ambient space needs {}",
                                entry.n + 1,
                                self.n + 1
                            ),
                        });
                    }
                }
            }
        }
        for (&i, d) in &self.diffs {
            if let Some(next) = self.diffs.get(&(i + 1)) {
                let comp = next.mul(d);
                for r in 0..comp.rows() {
                    for c in 0..comp.cols() {
                        if !comp.get(r, c).is_zero() {
                            return Err(Violation {
                                degree: i,
                                entry: Some((r, c)),
                                reason: "composite of consecutive differentials is nonzero".into(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Shift `C[k]`: the degree-`i` term of the result is the degree `i+k`
    /// term of `C`, with differentials reindexed and scaled by `(-1)^k`.
    pub fn shift(&self, k: i64) -> LineBundleComplex {
        let sign = if k.rem_euclid(2) == 0 {
            Scalar::one()
        } else {
            -Scalar::one()
        };
        let terms = self
            .terms
            .iter()
            .map(|(&i, t)| (i - k, t.clone()))
            .collect();
        let diffs = self
            .diffs
            .iter()
            .map(|(&i, d)| (i - k, d.scale(&sign)))
            .collect();
        let mut c = LineBundleComplex {
            n: self.n,
            terms,
            diffs,
        };
        c.normalize();
        c
    }

    /// Tensoring with `O(d)`: every twist moves by `d`, differentials are
    /// untouched.
    pub fn twist(&self, d: i64) -> LineBundleComplex {
        let terms = self
            .terms
            .iter()
            .map(|(&i, t)| (i, FreeTerm(t.0.iter().map(|&Twist(a)| Twist(a + d)).collect())))
            .collect();
        LineBundleComplex {
            n: self.n,
            terms,
            diffs: self.diffs.clone(),
        }
    }

    /// Degreewise concatenation with block-diagonal differentials.
    pub fn direct_sum(&self, other: &LineBundleComplex) -> Result<LineBundleComplex> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let degrees: std::collections::BTreeSet<i64> = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .copied()
            .collect();
        let mut terms = BTreeMap::new();
        for &i in &degrees {
            let mut t = self.term(i).0;
            t.extend(other.term(i).0);
            terms.insert(i, FreeTerm(t));
        }
        let mut diffs = BTreeMap::new();
        for &i in &degrees {
            let da = self.diff(i);
            let db = other.diff(i);
            if da.is_zero() && db.is_zero() {
                continue;
            }
            let (ra, ca) = (da.rows(), da.cols());
            let rows = ra + db.rows();
            let cols = ca + db.cols();
            let tgt = {
                let mut t = self.term(i + 1).0;
                t.extend(other.term(i + 1).0);
                FreeTerm(t)
            };
            let src = terms.get(&i).cloned().unwrap_or_default();
            let mut m = PolyMatrix::zero_map(self.n, &tgt, &src);
            for r in 0..ra {
                for c in 0..ca {
                    m.set(r, c, da.get(r, c).clone());
                }
            }
            for r in 0..db.rows() {
                for c in 0..db.cols() {
                    m.set(ra + r, ca + c, db.get(r, c).clone());
                }
            }
            let _ = (rows, cols);
            diffs.insert(i, m);
        }
        let mut c = LineBundleComplex {
            n: self.n,
            terms,
            diffs,
        };
        c.normalize();
        Ok(c)
    }

    /// Total complex of the termwise tensor product; twists add, and the
    /// second factor's differential carries the Koszul sign `(-1)^i`.
    ///
    /// Within the degree-`k` term, blocks `A^i (x) B^j` are ordered by
    /// ascending `i`, and inside a block the pair `(a, b)` sits at offset
    /// `a * |B^j| + b`.
    pub fn tensor(&self, other: &LineBundleComplex) -> Result<LineBundleComplex> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        if self.is_zero_complex() || other.is_zero_complex() {
            return Ok(LineBundleComplex::zero(self.n));
        }
        // Offsets of block (i, j) inside total degree i + j.
        let mut offsets: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        let mut terms: BTreeMap<i64, FreeTerm> = BTreeMap::new();
        for (&i, ta) in &self.terms {
            for (&j, tb) in &other.terms {
                let k = i + j;
                let entry = terms.entry(k).or_default();
                offsets.insert((i, j), entry.len());
                for &Twist(a) in &ta.0 {
                    for &Twist(b) in &tb.0 {
                        entry.0.push(Twist(a + b));
                    }
                }
            }
        }
        let mut diffs: BTreeMap<i64, PolyMatrix> = BTreeMap::new();
        let degrees: Vec<i64> = terms.keys().copied().collect();
        for &k in &degrees {
            if !terms.contains_key(&(k + 1)) {
                continue;
            }
            let src = terms[&k].clone();
            let tgt = terms[&(k + 1)].clone();
            let mut m = PolyMatrix::zero_map(self.n, &tgt, &src);
            for (&(i, j), &src_off) in &offsets {
                if i + j != k {
                    continue;
                }
                let na = self.term(i).len();
                let nb = other.term(j).len();
                // d_A (x) id_B into block (i+1, j).
                if let Some(&tgt_off) = offsets.get(&(i + 1, j)) {
                    let da = self.diff(i);
                    for ra in 0..da.rows() {
                        for ca in 0..na {
                            let p = da.get(ra, ca);
                            if p.is_zero() {
                                continue;
                            }
                            for b in 0..nb {
                                m.set(tgt_off + ra * nb + b, src_off + ca * nb + b, p.clone());
                            }
                        }
                    }
                }
                // (-1)^i id_A (x) d_B into block (i, j+1).
                if let Some(&tgt_off) = offsets.get(&(i, j + 1)) {
                    let db = other.diff(j);
                    let sign = if i.rem_euclid(2) == 0 {
                        Scalar::one()
                    } else {
                        -Scalar::one()
                    };
                    let nb1 = other.term(j + 1).len();
                    for rb in 0..db.rows() {
                        for cb in 0..nb {
                            let p = db.get(rb, cb);
                            if p.is_zero() {
                                continue;
                            }
                            let signed = p.scale(&sign);
                            for a in 0..na {
                                m.set(tgt_off + a * nb1 + rb, src_off + a * nb + cb, signed.clone());
                            }
                        }
                    }
                }
            }
            if !m.is_zero() {
                diffs.insert(k, m);
            }
        }
        let mut c = LineBundleComplex {
            n: self.n,
            terms,
            diffs,
        };
        c.normalize();
        Ok(c)
    }

    /// `RHom(C, O)` for complexes of bundles: the degree-`i` term is the
    /// dual of the degree `-i` term (`O(d) -> O(-d)`, summand order kept)
    /// and differentials are transposed. No sign is introduced, so
    /// `dual(dual(C)) = C` exactly.
    pub fn dual(&self) -> LineBundleComplex {
        let terms: BTreeMap<i64, FreeTerm> = self
            .terms
            .iter()
            .map(|(&i, t)| {
                (
                    -i,
                    FreeTerm(t.0.iter().map(|&Twist(d)| Twist(-d)).collect()),
                )
            })
            .collect();
        let diffs: BTreeMap<i64, PolyMatrix> = self
            .diffs
            .iter()
            .map(|(&i, d)| (-i - 1, d.transpose()))
            .collect();
        let mut c = LineBundleComplex {
            n: self.n,
            terms,
            diffs,
        };
        c.normalize();
        c
    }

    /// Splits off contractible `[O(a) = O(a)]` summands until no
    /// differential entry is a nonzero constant. The result is homotopy
    /// equivalent to the input.
    pub fn prune(&self) -> LineBundleComplex {
        let mut c = self.clone();
        let mut degree = match c.diffs.keys().next() {
            Some(&d) => d,
            None => return c,
        };
        let last = c.diffs.keys().next_back().copied().unwrap_or(degree);
        while degree <= last {
            while let Some((r, col, u)) = c.find_constant_entry(degree) {
                c.cancel_pair(degree, r, col, u);
            }
            degree += 1;
        }
        c.normalize();
        c
    }

    fn find_constant_entry(&self, i: i64) -> Option<(usize, usize, Scalar)> {
        let d = self.diffs.get(&i)?;
        for r in 0..d.rows() {
            for c in 0..d.cols() {
                if let Some(u) = d.get(r, c).as_nonzero_constant() {
                    return Some((r, c, u.clone()));
                }
            }
        }
        None
    }

    /// Gaussian cancellation of the unit entry `(r, c)` of `d^i`: removes
    /// summand `c` of `term(i)` and summand `r` of `term(i+1)`, replaces
    /// `d^i` by its Schur complement, and drops the matching row of
    /// `d^{i-1}` and column of `d^{i+1}`.
    fn cancel_pair(&mut self, i: i64, r: usize, c: usize, u: Scalar) {
        let d = self.diffs.get(&i).expect("cancelling in a present differential");
        let uinv = u.inv();
        let mut updated = PolyMatrix::from_fn(d.rows() - 1, d.cols() - 1, |rr, cc| {
            let or = if rr < r { rr } else { rr + 1 };
            let oc = if cc < c { cc } else { cc + 1 };
            let x = d.get(or, oc).clone();
            let v = d.get(or, c);
            let w = d.get(r, oc);
            if v.is_zero() || w.is_zero() {
                x
            } else {
                x.sub(&v.mul(w).scale(&uinv))
            }
        });
        // Terms shrink.
        if let Some(t) = self.terms.get_mut(&i) {
            t.0.remove(c);
        }
        if let Some(t) = self.terms.get_mut(&(i + 1)) {
            t.0.remove(r);
        }
        if updated.rows() == 0 || updated.cols() == 0 || updated.is_zero() {
            self.diffs.remove(&i);
        } else {
            std::mem::swap(self.diffs.get_mut(&i).unwrap(), &mut updated);
        }
        if let Some(prev) = self.diffs.get(&(i - 1)) {
            let next = prev.remove_row(c);
            if next.rows() == 0 || next.is_zero() {
                self.diffs.remove(&(i - 1));
            } else {
                self.diffs.insert(i - 1, next);
            }
        }
        if let Some(succ) = self.diffs.get(&(i + 1)) {
            let next = succ.remove_col(r);
            if next.cols() == 0 || next.is_zero() {
                self.diffs.remove(&(i + 1));
            } else {
                self.diffs.insert(i + 1, next);
            }
        }
    }

    /// Maps every coefficient into `field`.
    pub fn to_field(&self, field: FieldSpec) -> Result<LineBundleComplex> {
        let mut diffs = BTreeMap::new();
        for (&i, d) in &self.diffs {
            diffs.insert(i, d.to_field(field)?);
        }
        Ok(LineBundleComplex {
            n: self.n,
            terms: self.terms.clone(),
            diffs,
        })
    }
}

/// A chain map between two complexes on the same `P^n`: per-degree
/// polynomial matrices `f^i : A^i -> B^i` with commuting squares.
#[derive(Debug, Clone)]
pub struct ChainMap {
    pub source: LineBundleComplex,
    pub target: LineBundleComplex,
    maps: BTreeMap<i64, PolyMatrix>,
}

impl ChainMap {
    pub fn new(
        source: LineBundleComplex,
        target: LineBundleComplex,
        maps: BTreeMap<i64, PolyMatrix>,
    ) -> Result<Self> {
        if source.n() != target.n() {
            return Err(Error::DimensionMismatch(source.n(), target.n()));
        }
        let mut maps = maps;
        maps.retain(|_, m| !m.is_zero());
        let f = ChainMap {
            source,
            target,
            maps,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn zero(source: LineBundleComplex, target: LineBundleComplex) -> Result<Self> {
        ChainMap::new(source, target, BTreeMap::new())
    }

    pub fn identity(c: &LineBundleComplex) -> Self {
        let mut maps = BTreeMap::new();
        for (&i, t) in c.terms() {
            let mut m = PolyMatrix::zero_map(c.n(), t, t);
            for k in 0..t.len() {
                m.set(k, k, HomogPoly::constant(c.n(), Scalar::one()));
            }
            maps.insert(i, m);
        }
        ChainMap {
            source: c.clone(),
            target: c.clone(),
            maps,
        }
    }

    pub fn map(&self, i: i64) -> PolyMatrix {
        match self.maps.get(&i) {
            Some(m) => m.clone(),
            None => PolyMatrix::zero_map(self.source.n(), &self.target.term(i), &self.source.term(i)),
        }
    }

    pub fn maps(&self) -> &BTreeMap<i64, PolyMatrix> {
        &self.maps
    }

    /// Checks shapes, homogeneity, and `f^{i+1} d_A^i = d_B^i f^i`.
    pub fn validate(&self) -> Result<()> {
        for (&i, m) in &self.maps {
            let src = self.source.term(i);
            let tgt = self.target.term(i);
            if m.rows() != tgt.len() || m.cols() != src.len() {
                return Err(Error::Validation(format!(
                    "chain map at degree {i} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    tgt.len(),
                    src.len()
                )));
            }
            for r in 0..m.rows() {
                for c in 0..m.cols() {
                    let need = tgt.twist(r).0 - src.twist(c).0;
                    if m.get(r, c).degree != need || (need < 0 && !m.get(r, c).is_zero()) {
                        return Err(Error::Validation(format!(
                            "chain map entry ({r}, {c}) at degree {i} violates homogeneity"
                        )));
                    }
                }
            }
        }
        let degrees: std::collections::BTreeSet<i64> = self
            .source
            .terms()
            .keys()
            .chain(self.target.terms().keys())
            .copied()
            .collect();
        for &i in &degrees {
            let lhs = self.map(i + 1).mul(&self.source.diff(i));
            let rhs = self.target.diff(i).mul(&self.map(i));
            for r in 0..lhs.rows() {
                for c in 0..lhs.cols() {
                    if !lhs.get(r, c).sub(rhs.get(r, c)).is_zero() {
                        return Err(Error::Validation(format!(
                            "chain map square at degree {i} does not commute (entry ({r}, {c}))"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Mapping cone of a validated chain map: `C^i = A^{i+1} (+) B^i` with
/// differential `(-d_A^{i+1}, 0; f^{i+1}, d_B^i)`. A-coordinates come first.
pub fn cone(f: &ChainMap) -> Result<LineBundleComplex> {
    f.validate()?;
    let a = &f.source;
    let b = &f.target;
    let n = a.n();
    let degrees: std::collections::BTreeSet<i64> = a
        .terms()
        .keys()
        .map(|&i| i - 1)
        .chain(b.terms().keys().copied())
        .collect();
    let mut terms = BTreeMap::new();
    for &i in &degrees {
        let mut t = a.term(i + 1).0;
        t.extend(b.term(i).0);
        if !t.is_empty() {
            terms.insert(i, FreeTerm(t));
        }
    }
    let mut diffs = BTreeMap::new();
    for &i in &degrees {
        let src_a = a.term(i + 1);
        let src_b = b.term(i);
        let tgt_a = a.term(i + 2);
        let tgt_b = b.term(i + 1);
        let src = FreeTerm([src_a.0.clone(), src_b.0.clone()].concat());
        let tgt = FreeTerm([tgt_a.0.clone(), tgt_b.0.clone()].concat());
        if src.is_empty() || tgt.is_empty() {
            continue;
        }
        let da = a.diff(i + 1);
        let db = b.diff(i);
        let fm = f.map(i + 1);
        let minus_one = -Scalar::one();
        let mut m = PolyMatrix::zero_map(n, &tgt, &src);
        for r in 0..da.rows() {
            for c in 0..da.cols() {
                m.set(r, c, da.get(r, c).scale(&minus_one));
            }
        }
        for r in 0..fm.rows() {
            for c in 0..fm.cols() {
                m.set(tgt_a.len() + r, c, fm.get(r, c).clone());
            }
        }
        for r in 0..db.rows() {
            for c in 0..db.cols() {
                m.set(tgt_a.len() + r, src_a.len() + c, db.get(r, c).clone());
            }
        }
        if !m.is_zero() {
            diffs.insert(i, m);
        }
    }
    LineBundleComplex::new(n, terms, diffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn euler_like(n: usize, entries: Vec<(&str, i64, i64)>) -> PolyMatrix {
        // Single-column helper for small tests.
        let polys: Vec<HomogPoly> = entries
            .iter()
            .map(|(s, tgt, src)| parse_poly(s, n, tgt - src).unwrap())
            .collect();
        let rows = polys.len();
        PolyMatrix::from_fn(rows, 1, |r, _| polys[r].clone())
    }

    fn two_term(n: usize, src_twist: i64, tgt_twist: i64, entry: &str) -> LineBundleComplex {
        let mut terms = BTreeMap::new();
        terms.insert(-1, FreeTerm(vec![Twist(src_twist)]));
        terms.insert(0, FreeTerm(vec![Twist(tgt_twist)]));
        let mut diffs = BTreeMap::new();
        diffs.insert(-1, euler_like(n, vec![(entry, tgt_twist, src_twist)]));
        LineBundleComplex::new(n, terms, diffs).unwrap()
    }

    #[test]
    fn validate_accepts_single_term_and_x0_complex() {
        assert!(LineBundleComplex::structure_sheaf(1).validate().is_ok());
        // [O(-1) --x0--> O] on P^1.
        let c = two_term(1, -1, 0, "x0");
        assert!(c.validate().is_ok());
    }

    #[test]
    fn validate_rejects_nonzero_composite() {
        // [O(-2) --x0--> O(-1) --x0--> O]: x0 * x0 != 0.
        let mut terms = BTreeMap::new();
        terms.insert(0, FreeTerm(vec![Twist(-2)]));
        terms.insert(1, FreeTerm(vec![Twist(-1)]));
        terms.insert(2, FreeTerm(vec![Twist(0)]));
        let mut diffs = BTreeMap::new();
        diffs.insert(0, euler_like(1, vec![("x0", -1, -2)]));
        diffs.insert(1, euler_like(1, vec![("x0", 0, -1)]));
        let c = LineBundleComplex::new(1, terms, diffs).unwrap();
        let v = c.validate().unwrap_err();
        assert!(v.reason.contains("composite"));
        assert_eq!(v.degree, 0);
    }

    #[test]
    fn validate_rejects_wrong_degree_entry() {
        let mut terms = BTreeMap::new();
        terms.insert(0, FreeTerm(vec![Twist(0)]));
        terms.insert(1, FreeTerm(vec![Twist(0)]));
        let mut diffs = BTreeMap::new();
        // Degree-1 entry where the twists force degree 0.
        diffs.insert(0, euler_like(1, vec![("x0", 1, 0)]));
        let c = LineBundleComplex::new(1, terms, diffs).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn shift_identities() {
        let c = two_term(1, -1, 0, "x0");
        assert_eq!(c.shift(0), c);
        assert_eq!(c.shift(1).shift(-1), c);
        // O in degree 0 shifted by 2 lands in degree -2.
        let o = LineBundleComplex::structure_sheaf(2).shift(2);
        assert_eq!(o.support(), vec![-2]);
    }

    #[test]
    fn cone_of_zero_map_is_shifted_sum() {
        let a = two_term(1, -1, 0, "x0");
        let b = two_term(1, -2, 0, "x0^2");
        let z = ChainMap::zero(a.clone(), b.clone()).unwrap();
        let c = cone(&z).unwrap();
        let expect = a.shift(1).direct_sum(&b).unwrap();
        // Degreewise dimensions agree (block order differs only when both
        // parts meet in one degree; compare multisets of twists).
        assert_eq!(c.support(), expect.support());
        for i in c.support() {
            let mut x = c.term(i).0;
            let mut y = expect.term(i).0;
            x.sort();
            y.sort();
            assert_eq!(x, y);
        }
        assert!(c.validate().is_ok());
    }

    #[test]
    fn cone_of_identity_prunes_to_zero() {
        let c = two_term(1, -1, 0, "x0");
        let id = ChainMap::identity(&c);
        let cn = cone(&id).unwrap();
        assert!(cn.validate().is_ok());
        assert!(cn.prune().is_zero_complex());
    }

    #[test]
    fn direct_sum_with_zero_is_identity() {
        let a = two_term(2, -1, 0, "x1");
        let z = LineBundleComplex::zero(2);
        assert_eq!(a.direct_sum(&z).unwrap(), a);
        assert_eq!(z.direct_sum(&a).unwrap(), a);
    }

    #[test]
    fn direct_sum_concatenates_terms() {
        let a = LineBundleComplex::structure_sheaf(1);
        let b = LineBundleComplex::line_bundle(1, -1);
        let s = a.direct_sum(&b).unwrap();
        assert_eq!(s.term(0).0, vec![Twist(0), Twist(-1)]);
    }

    #[test]
    fn tensor_unit_and_twist_addition() {
        let a = two_term(1, -1, 0, "x0");
        let unit = LineBundleComplex::structure_sheaf(1);
        assert_eq!(a.tensor(&unit).unwrap(), a);
        assert_eq!(unit.tensor(&a).unwrap(), a);
        let oa = LineBundleComplex::line_bundle(2, 2);
        let ob = LineBundleComplex::line_bundle(2, -5);
        assert_eq!(
            oa.tensor(&ob).unwrap(),
            LineBundleComplex::line_bundle(2, -3)
        );
    }

    #[test]
    fn tensor_of_two_term_complexes_validates() {
        let a = two_term(1, -1, 0, "x0");
        let b = two_term(1, -1, 0, "x1");
        let t = a.tensor(&b).unwrap();
        assert!(t.validate().is_ok());
        assert_eq!(t.total_summands(), 4);
    }

    #[test]
    fn dual_examples() {
        assert_eq!(
            LineBundleComplex::line_bundle(2, 3).dual(),
            LineBundleComplex::line_bundle(2, -3)
        );
        // Dual of [O(-1) --x0--> O] in degrees -1, 0 is
        // [O --x0--> O(1)] in degrees 0, 1.
        let c = two_term(1, -1, 0, "x0");
        let d = c.dual();
        assert_eq!(d.support(), vec![0, 1]);
        assert_eq!(d.term(0).0, vec![Twist(0)]);
        assert_eq!(d.term(1).0, vec![Twist(1)]);
        assert_eq!(d.diff(0).get(0, 0), &parse_poly("x0", 1, 1).unwrap());
        assert_eq!(d.dual(), c);
    }

    #[test]
    fn twist_composes() {
        let c = two_term(1, -1, 0, "x0");
        assert_eq!(c.twist(0), c);
        assert_eq!(c.twist(2).twist(-3), c.twist(-1));
    }

    #[test]
    fn prune_is_fixed_point_without_constants() {
        let c = two_term(1, -1, 0, "x0");
        assert_eq!(c.prune(), c);
    }

    #[test]
    fn prune_removes_contractible_summand_from_sum() {
        let a = two_term(1, -1, 0, "x0");
        let id = ChainMap::identity(&LineBundleComplex::structure_sheaf(1));
        let contractible = cone(&id).unwrap();
        let s = a.direct_sum(&contractible).unwrap();
        let p = s.prune();
        assert!(p.validate().is_ok());
        for i in p.support() {
            let mut x = p.term(i).0;
            let mut y = a.term(i).0;
            x.sort();
            y.sort();
            assert_eq!(x, y);
        }
    }

    #[test]
    fn chain_map_validation_catches_noncommuting_square() {
        let a = two_term(1, -1, 0, "x0");
        let b = two_term(1, -1, 0, "x1");
        // Identity-shaped map between different complexes does not commute.
        let mut maps = BTreeMap::new();
        let one = HomogPoly::constant(1, Scalar::one());
        maps.insert(-1, PolyMatrix::from_fn(1, 1, |_, _| one.clone()));
        maps.insert(0, PolyMatrix::from_fn(1, 1, |_, _| one.clone()));
        assert!(ChainMap::new(a, b, maps).is_err());
    }
}
