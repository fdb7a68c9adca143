//! Koszul complexes: the rewrite rules that move twists into the window,
//! the resolutions of the twisted cotangent powers, and skyscraper
//! complexes.
//!
//! All of them are built from one matrix: contraction of the exterior
//! algebra on a list of degree-one forms. Bases of `Λ^k` are the size-`k`
//! subsets of the index set in lexicographic order.

use std::collections::BTreeMap;
use std::sync::Mutex;

use crate::complex::{FreeTerm, LineBundleComplex, PolyMatrix, Twist};
use crate::error::{Error, Result};
use crate::matrix::ExactMatrix;
use crate::poly::{binomial, graded_dim, multiplication_matrix, HomogPoly};

/// Size-`k` subsets of `{0, .., m-1}` as sorted tuples, lexicographically.
pub fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    gen_subsets(m, k, 0, &mut current, &mut out);
    out
}

fn gen_subsets(m: usize, k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for i in start..m {
        current.push(i);
        gen_subsets(m, k, i + 1, current, out);
        current.pop();
    }
}

/// Matrix of the Koszul contraction `Λ^k -> Λ^{k-1}` against the given
/// degree-one forms: `e_S -> sum_l (-1)^{pos(l, S)} f_l e_{S \ l}`.
///
/// Shape is `C(m, k-1) x C(m, k)` where `m = forms.len()`; entries are
/// degree-one polynomials, so the map raises each twist by one.
pub fn koszul_differential(n: usize, forms: &[HomogPoly], k: usize) -> PolyMatrix {
    let m = forms.len();
    assert!(k >= 1 && k <= m);
    let rows = subsets(m, k - 1);
    let cols = subsets(m, k);
    let mut index = BTreeMap::new();
    for (i, s) in rows.iter().enumerate() {
        index.insert(s.clone(), i);
    }
    let mut mat = PolyMatrix::from_fn(rows.len(), cols.len(), |_, _| HomogPoly::zero(n, 1));
    for (c, s) in cols.iter().enumerate() {
        for (pos, &l) in s.iter().enumerate() {
            let mut reduced = s.clone();
            reduced.remove(pos);
            let r = index[&reduced];
            let signed = if pos % 2 == 0 {
                forms[l].clone()
            } else {
                forms[l].neg()
            };
            mat.set(r, c, signed);
        }
    }
    mat
}

fn coordinate_forms(n: usize) -> Vec<HomogPoly> {
    (0..=n).map(|i| HomogPoly::variable(n, i)).collect()
}

/// A Koszul rewrite rule: an exact replacement complex for one
/// out-of-window twist, plus the map joining it to `O(d)` itself.
#[derive(Debug, Clone)]
pub struct KoszulRewrite {
    /// The replacement complex, quasi-isomorphic to `O(d)[0]`.
    pub complex: LineBundleComplex,
    /// For the lowering direction, the surjection `R^0 -> O(d)` (one row);
    /// for raising, the injection `O(d) -> R^0` (one column).
    pub augmentation: PolyMatrix,
}

/// Rewrites `O(d)` through the twists `d-n-1, .., d-1`: the truncated
/// twisted Koszul complex `[O(d-n-1) -> ... -> O(d-1)^{n+1}]` in degrees
/// `-n..0`, with augmentation `(x_0, .., x_n) : O(d-1)^{n+1} -> O(d)`.
pub fn lowering_rewrite(n: usize, d: i64) -> KoszulRewrite {
    validate_rule_once(n);
    let forms = coordinate_forms(n);
    let mut terms = BTreeMap::new();
    for j in 0..=n as i64 {
        let mult = binomial(n as i64 + 1, j + 1) as usize;
        terms.insert(-j, FreeTerm(vec![Twist(d - 1 - j); mult]));
    }
    let mut diffs = BTreeMap::new();
    for j in 1..=n as i64 {
        // R^{-j} -> R^{-j+1} is the contraction Λ^{j+1} -> Λ^j.
        diffs.insert(-j, koszul_differential(n, &forms, j as usize + 1));
    }
    let complex = LineBundleComplex::new(n, terms, diffs).expect("Koszul rewrite shape");
    let augmentation = koszul_differential(n, &forms, 1);
    KoszulRewrite {
        complex,
        augmentation,
    }
}

/// Rewrites `O(d)` through the twists `d+1, .., d+n+1`: the truncated
/// twisted Koszul complex in degrees `0..n`, with the injection
/// `O(d) -> O(d+1)^{n+1}` whose entries are `(-1)^l x_l`.
pub fn raising_rewrite(n: usize, d: i64) -> KoszulRewrite {
    validate_rule_once(n);
    let forms = coordinate_forms(n);
    let mut terms = BTreeMap::new();
    for i in 0..=n as i64 {
        let mult = binomial(n as i64 + 1, n as i64 - i) as usize;
        terms.insert(i, FreeTerm(vec![Twist(d + 1 + i); mult]));
    }
    let mut diffs = BTreeMap::new();
    for i in 0..n as i64 {
        // R^i -> R^{i+1} is the contraction Λ^{n-i} -> Λ^{n-i-1}.
        diffs.insert(i, koszul_differential(n, &forms, n - i as usize));
    }
    let complex = LineBundleComplex::new(n, terms, diffs).expect("Koszul rewrite shape");
    let augmentation = koszul_differential(n, &forms, n + 1);
    KoszulRewrite {
        complex,
        augmentation,
    }
}

/// The Koszul complex on a list of degree-one forms: terms
/// `O(-k)^{C(m,k)}` in degrees `-m..0`. When the forms are independent and
/// cut out a linear subvariety, `H^0` is its structure sheaf and all other
/// cohomology vanishes.
pub fn koszul_complex_of_forms(n: usize, forms: &[HomogPoly]) -> Result<LineBundleComplex> {
    let m = forms.len();
    for f in forms {
        if f.degree != 1 || f.n != n {
            return Err(Error::Validation(
                "point forms must be linear forms in the ambient variables".into(),
            ));
        }
    }
    let mut terms = BTreeMap::new();
    for k in 0..=m as i64 {
        let mult = binomial(m as i64, k) as usize;
        terms.insert(-k, FreeTerm(vec![Twist(-k); mult]));
    }
    let mut diffs = BTreeMap::new();
    for k in 1..=m as i64 {
        diffs.insert(-k, koszul_differential(n, forms, k as usize));
    }
    LineBundleComplex::new(n, terms, diffs)
}

/// The right line-bundle resolution of `Ω^i(i)`:
/// `[Λ^i V (x) O -> Λ^{i-1} V (x) O(1) -> ... -> O(i)]` in degrees `0..i`,
/// quasi-isomorphic to `Ω^i(i)[0]`. For `i = 0` this is just `O`.
pub fn omega_twisted_resolution(n: usize, i: usize) -> LineBundleComplex {
    assert!(i <= n, "Ω^{i} vanishes beyond the ambient dimension");
    let forms = coordinate_forms(n);
    let mut terms = BTreeMap::new();
    for j in 0..=i as i64 {
        let mult = binomial(n as i64 + 1, i as i64 - j) as usize;
        terms.insert(j, FreeTerm(vec![Twist(j); mult]));
    }
    let mut diffs = BTreeMap::new();
    for j in 0..i as i64 {
        diffs.insert(j, koszul_differential(n, &forms, i - j as usize));
    }
    LineBundleComplex::new(n, terms, diffs).expect("Ω resolution shape")
}

/// Scalar matrix of a polynomial map `⊕ O(s_c) -> ⊕ O(t_r)` restricted to
/// the internal degree-`t` graded pieces, with respect to monomial bases.
pub fn graded_piece_matrix(
    d: &PolyMatrix,
    target: &FreeTerm,
    source: &FreeTerm,
    n: usize,
    t: i64,
) -> ExactMatrix {
    let src_dims: Vec<usize> = (0..source.len())
        .map(|c| graded_dim(n, t + source.twist(c).0))
        .collect();
    let tgt_dims: Vec<usize> = (0..target.len())
        .map(|r| graded_dim(n, t + target.twist(r).0))
        .collect();
    let src_offsets = offsets(&src_dims);
    let tgt_offsets = offsets(&tgt_dims);
    let mut m = ExactMatrix::zeros(tgt_dims.iter().sum(), src_dims.iter().sum());
    for r in 0..target.len() {
        for c in 0..source.len() {
            let p = d.get(r, c);
            if p.is_zero() || src_dims[c] == 0 || tgt_dims[r] == 0 {
                continue;
            }
            let block = multiplication_matrix(p, t + source.twist(c).0);
            for br in 0..block.rows() {
                for bc in 0..block.cols() {
                    let v = block.get(br, bc);
                    if !v.is_zero() {
                        m.set(tgt_offsets[r] + br, src_offsets[c] + bc, v);
                    }
                }
            }
        }
    }
    m
}

pub(crate) fn offsets(dims: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(dims.len());
    let mut acc = 0;
    for &d in dims {
        out.push(acc);
        acc += d;
    }
    out
}

static VALIDATED_RULES: Mutex<Option<std::collections::BTreeSet<usize>>> = Mutex::new(None);

/// One-time exactness validation of the Koszul rule for a given `n`:
/// the full twisted Koszul complex on the coordinate section must have
/// exact graded pieces in a sample of internal degrees (rank sums match
/// dimensions at every interior spot).
fn validate_rule_once(n: usize) {
    let mut guard = VALIDATED_RULES.lock().expect("rule cache");
    let set = guard.get_or_insert_with(Default::default);
    if set.contains(&n) {
        return;
    }
    let forms = coordinate_forms(n);
    // Terms Λ^j V (x) O(-j) in degree -j, j = 0..n+1; exact as sheaves and,
    // in internal degrees >= 1, exact as graded modules including the
    // rightmost spot.
    let term_of = |j: i64| -> FreeTerm {
        FreeTerm(vec![Twist(-j); binomial(n as i64 + 1, j) as usize])
    };
    for t in 1..=(2 * n as i64 + 2) {
        let mut prev_rank = 0usize; // rank of the map leaving spot j (into j-1)
        for j in (0..=n as i64 + 1).rev() {
            let dim: usize = graded_dim(n, t - j) * binomial(n as i64 + 1, j) as usize;
            let outgoing = if j >= 1 {
                let d = koszul_differential(n, &forms, j as usize);
                graded_piece_matrix(&d, &term_of(j - 1), &term_of(j), n, t).rank()
            } else {
                0
            };
            assert_eq!(
                outgoing + prev_rank,
                dim,
                "Koszul complex not exact at spot {j}, internal degree {t}, n = {n}"
            );
            prev_rank = outgoing;
        }
    }
    set.insert(n);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_enumeration() {
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(subsets(4, 0), vec![Vec::<usize>::new()]);
        assert_eq!(subsets(3, 3).len(), 1);
    }

    #[test]
    fn contraction_squares_to_zero() {
        for n in 1..=3usize {
            let forms = coordinate_forms(n);
            for k in 2..=n + 1 {
                let d1 = koszul_differential(n, &forms, k);
                let d0 = koszul_differential(n, &forms, k - 1);
                assert!(d0.mul(&d1).is_zero(), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn lowering_rewrite_shapes() {
        // O(1) on P^1 rewrites through [O(-1) -> O^2] in degrees -1..0.
        let r = lowering_rewrite(1, 1);
        assert_eq!(r.complex.support(), vec![-1, 0]);
        assert_eq!(r.complex.term(-1).0, vec![Twist(-1)]);
        assert_eq!(r.complex.term(0).0, vec![Twist(0), Twist(0)]);
        assert!(r.complex.validate().is_ok());
        // Augmentation row (x0, x1) annihilates the internal differential.
        let aug = r.augmentation.mul(&r.complex.diff(-1));
        assert!(aug.is_zero());
    }

    #[test]
    fn raising_rewrite_shapes() {
        // O(-2) on P^1 rewrites through [O(-1)^2 -> O] in degrees 0..1.
        let r = raising_rewrite(1, -2);
        assert_eq!(r.complex.support(), vec![0, 1]);
        assert_eq!(r.complex.term(0).0, vec![Twist(-1), Twist(-1)]);
        assert_eq!(r.complex.term(1).0, vec![Twist(0)]);
        assert!(r.complex.validate().is_ok());
        let aug = r.complex.diff(0).mul(&r.augmentation);
        assert!(aug.is_zero());
        // O(-3) on P^2: terms O(-2)^3, O(-1)^3, O in degrees 0..2.
        let r = raising_rewrite(2, -3);
        assert_eq!(r.complex.term(0).0, vec![Twist(-2); 3]);
        assert_eq!(r.complex.term(1).0, vec![Twist(-1); 3]);
        assert_eq!(r.complex.term(2).0, vec![Twist(0)]);
    }

    #[test]
    fn omega_resolution_is_a_valid_complex() {
        for n in 1..=3usize {
            for i in 0..=n {
                let r = omega_twisted_resolution(n, i);
                assert!(r.validate().is_ok(), "n={n} i={i}");
                if i == 0 {
                    assert_eq!(r, LineBundleComplex::structure_sheaf(n));
                }
            }
        }
        // Euler: [V (x) O -> O(1)] on P^2.
        let e = omega_twisted_resolution(2, 1);
        assert_eq!(e.term(0).0, vec![Twist(0); 3]);
        assert_eq!(e.term(1).0, vec![Twist(1)]);
    }

    #[test]
    fn koszul_point_complex_shape() {
        let forms = vec![HomogPoly::variable(2, 1), HomogPoly::variable(2, 2)];
        let c = koszul_complex_of_forms(2, &forms).unwrap();
        assert!(c.validate().is_ok());
        assert_eq!(c.term(-2).0, vec![Twist(-2)]);
        assert_eq!(c.term(-1).0, vec![Twist(-1); 2]);
        assert_eq!(c.term(0).0, vec![Twist(0)]);
    }

    #[test]
    fn rewrite_validation_runs() {
        // Constructing rules triggers the one-time exactness validation.
        lowering_rewrite(2, 3);
        raising_rewrite(2, -4);
        lowering_rewrite(3, 1);
    }
}
