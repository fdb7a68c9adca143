//! The constructive tilting-window layer: rewrite any object into the twist
//! range `[-n, 0]`, decide zero objects and quasi-isomorphisms, and report
//! Beilinson monad multiplicities.
//!
//! Reduction repeatedly picks the extremal out-of-window twist (largest
//! positive first, then most negative), replaces every summand carrying it
//! at one cohomological degree by its truncated twisted Koszul complex,
//! reconnects the neighbouring differentials by solving graded linear
//! systems, and prunes. Each substitution strictly shrinks the count of
//! summands at the extremal twist and only introduces twists strictly
//! closer to the window, so the loop terminates. Lifts exist because the
//! Koszul complex is exact as a complex of graded modules and prune has
//! removed every constant entry beforehand; an unsolvable system therefore
//! signals an implementation bug and surfaces as `Error::Internal`.

use std::collections::BTreeMap;
use std::ops::Deref;

use crate::complex::{cone, ChainMap, FreeTerm, LineBundleComplex, PolyMatrix, Twist};
use crate::error::{Error, Result};
use crate::ext::{ext_table_reduced, ExtTable};
use crate::koszul::{graded_piece_matrix, lowering_rewrite, omega_twisted_resolution};
use crate::numerics::chern_character;
use crate::poly::{graded_dim, HomogPoly};

/// A complex whose every twist lies in `[-n, 0]`; inside this range Hom
/// complexes compute Ext.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowComplex {
    inner: LineBundleComplex,
}

impl WindowComplex {
    /// Wraps a complex after checking the twist bound.
    pub fn try_new(c: LineBundleComplex) -> Result<WindowComplex> {
        let n = c.n() as i64;
        if let Some((lo, hi)) = c.twist_range() {
            if lo < -n || hi > 0 {
                return Err(Error::Validation(format!(
                    "twists [{lo}, {hi}] fall outside the window [-{n}, 0]"
                )));
            }
        }
        Ok(WindowComplex { inner: c })
    }

    pub fn as_complex(&self) -> &LineBundleComplex {
        &self.inner
    }

    pub fn into_complex(self) -> LineBundleComplex {
        self.inner
    }
}

impl Deref for WindowComplex {
    type Target = LineBundleComplex;

    fn deref(&self) -> &LineBundleComplex {
        &self.inner
    }
}

/// Resource limits for window reduction.
#[derive(Debug, Clone, Copy)]
pub struct ReduceOptions {
    /// Abort when an intermediate complex exceeds this many summands.
    pub max_summands: usize,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions { max_summands: 20_000 }
    }
}

/// Rewrites `C` into a quasi-isomorphic window complex with default limits.
pub fn reduce_to_window(c: &LineBundleComplex) -> Result<WindowComplex> {
    reduce_to_window_with(c, ReduceOptions::default())
}

/// Rewrites `C` into a quasi-isomorphic window complex.
///
/// Postconditions checked on every call: the result validates, its twists
/// lie in `[-n, 0]`, and its Chern character equals that of the input
/// exactly.
pub fn reduce_to_window_with(
    c: &LineBundleComplex,
    opts: ReduceOptions,
) -> Result<WindowComplex> {
    c.validate().map_err(Error::from)?;
    let n = c.n() as i64;
    let ch_before = chern_character(c);
    let mut cur = c.prune();
    loop {
        if cur.total_summands() > opts.max_summands {
            return Err(Error::ResourceCap(format!(
                "window reduction grew past {} summands",
                opts.max_summands
            )));
        }
        let Some((lo, hi)) = cur.twist_range() else { break };
        if hi > 0 {
            let i0 = first_degree_with_twist(&cur, hi);
            cur = substitute_lower(&cur, i0, hi)?;
        } else if lo < -n {
            let i0 = first_degree_with_twist(&cur, lo);
            cur = substitute_raise(&cur, i0, lo)?;
        } else {
            break;
        }
        cur.validate().map_err(|v| {
            Error::Internal(format!("window substitution produced an invalid complex: {v}"))
        })?;
        cur = cur.prune();
    }
    if chern_character(&cur) != ch_before {
        return Err(Error::Internal(
            "window reduction changed the Chern character".into(),
        ));
    }
    WindowComplex::try_new(cur)
}

fn first_degree_with_twist(c: &LineBundleComplex, twist: i64) -> i64 {
    for (&i, t) in c.terms() {
        if t.0.iter().any(|&Twist(d)| d == twist) {
            return i;
        }
    }
    unreachable!("twist reported by twist_range must occur somewhere")
}

/// Replaces every summand `O(d)` (`d > 0`) in degree `i0` by the truncated
/// twisted Koszul complex in degrees `i0-n..i0`, lifting the incoming
/// differential through the Koszul surjection and the outgoing one through
/// plain composition.
fn substitute_lower(c: &LineBundleComplex, i0: i64, d: i64) -> Result<LineBundleComplex> {
    let n = c.n();
    let rule = lowering_rewrite(n, d);
    let old = c.term(i0);
    let instances: Vec<usize> = (0..old.len()).filter(|&i| old.twist(i).0 == d).collect();
    let rest: Vec<usize> = (0..old.len()).filter(|&i| old.twist(i).0 != d).collect();
    let k = instances.len();
    debug_assert!(k > 0);
    let r_term = |j: i64| rule.complex.term(-j);
    let rho = |j: i64| rule.complex.diff(-j); // R^{-j} -> R^{-j+1}
    let nn = n as i64;

    // New terms.
    let mut terms = c.terms().clone();
    {
        let mut t: Vec<Twist> = rest.iter().map(|&i| old.twist(i)).collect();
        for _ in 0..k {
            t.extend(r_term(0).0.iter().copied());
        }
        terms.insert(i0, FreeTerm(t));
    }
    for j in 1..=nn {
        let mut t = c.term(i0 - j).0;
        for _ in 0..k {
            t.extend(r_term(j).0.iter().copied());
        }
        terms.insert(i0 - j, FreeTerm(t));
    }

    // Lifts λ_j : term(i0-j-1) -> R^{-j} per instance, j = 0..n.
    // λ_0 solves q λ_0 = β (the old row into the replaced summand);
    // λ_j solves ρ_j λ_j = -λ_{j-1} d_old, which the exactness of the
    // Koszul complex makes solvable.
    let mut lambdas: Vec<Vec<PolyMatrix>> = Vec::with_capacity(nn as usize + 1);
    {
        let d_in = c.diff(i0 - 1);
        let v = c.term(i0 - 1);
        let beta_rows: Vec<PolyMatrix> = instances
            .iter()
            .map(|&s| PolyMatrix::from_fn(1, v.len(), |_, cc| d_in.get(s, cc).clone()))
            .collect();
        let lam0 = solve_poly_batch(
            n,
            &rule.augmentation,
            &FreeTerm(vec![Twist(d)]),
            &r_term(0),
            &beta_rows,
            &v,
        )?;
        lambdas.push(lam0);
    }
    for j in 1..=nn {
        let d_old = c.diff(i0 - j - 1); // term(i0-j-1) -> term(i0-j)
        let v = c.term(i0 - j - 1);
        let prev = &lambdas[(j - 1) as usize];
        let targets: Vec<PolyMatrix> = prev
            .iter()
            .map(|lam| {
                let comp = lam.mul(&d_old);
                comp.scale(&-crate::scalar::Scalar::one())
            })
            .collect();
        let lam = solve_poly_batch(n, &rho(j), &r_term(j - 1), &r_term(j), &targets, &v)?;
        lambdas.push(lam);
    }

    // New differentials.
    let mut diffs: BTreeMap<i64, PolyMatrix> = c.diffs().clone();
    for j in 0..=nn + 1 {
        diffs.remove(&(i0 - j));
    }

    // d'^{i0}: old columns kept for `rest`, instance columns become α ∘ q.
    let tgt_up = c.term(i0 + 1);
    if !tgt_up.is_empty() {
        let d_out = c.diff(i0);
        let src = terms.get(&i0).cloned().unwrap_or_default();
        let mut m = PolyMatrix::zero_map(n, &tgt_up, &src);
        for (nc, &oc) in rest.iter().enumerate() {
            for r in 0..tgt_up.len() {
                m.set(r, nc, d_out.get(r, oc).clone());
            }
        }
        let q = &rule.augmentation;
        let r0 = r_term(0).len();
        for (s, &oc) in instances.iter().enumerate() {
            for r in 0..tgt_up.len() {
                let alpha = d_out.get(r, oc);
                if alpha.is_zero() {
                    continue;
                }
                for l in 0..r0 {
                    m.set(r, rest.len() + s * r0 + l, alpha.mul(q.get(0, l)));
                }
            }
        }
        if !m.is_zero() {
            diffs.insert(i0, m);
        }
    }

    // d'^{i0-j} for j = 1..n: blocks (old, 0; λ_{j-1}, ρ_j).
    for j in 1..=nn {
        let src = terms.get(&(i0 - j)).cloned().unwrap_or_default();
        let tgt = terms.get(&(i0 - j + 1)).cloned().unwrap_or_default();
        if src.is_empty() || tgt.is_empty() {
            continue;
        }
        let old_cols = c.term(i0 - j).len();
        let rj = r_term(j).len();
        let rj1 = r_term(j - 1).len();
        let rho_j = rho(j);
        let mut m = PolyMatrix::zero_map(n, &tgt, &src);
        // Old-old block; for j = 1 the old rows are the `rest` sublist.
        let d_old = c.diff(i0 - j);
        if j == 1 {
            for (nr, &or) in rest.iter().enumerate() {
                for cc in 0..old_cols {
                    m.set(nr, cc, d_old.get(or, cc).clone());
                }
            }
        } else {
            for rr in 0..c.term(i0 - j + 1).len() {
                for cc in 0..old_cols {
                    m.set(rr, cc, d_old.get(rr, cc).clone());
                }
            }
        }
        let row_base = if j == 1 { rest.len() } else { c.term(i0 - j + 1).len() };
        for s in 0..k {
            let lam = &lambdas[(j - 1) as usize][s];
            for rr in 0..rj1 {
                for cc in 0..old_cols {
                    m.set(row_base + s * rj1 + rr, cc, lam.get(rr, cc).clone());
                }
                for cc in 0..rj {
                    m.set(
                        row_base + s * rj1 + rr,
                        old_cols + s * rj + cc,
                        rho_j.get(rr, cc).clone(),
                    );
                }
            }
        }
        if !m.is_zero() {
            diffs.insert(i0 - j, m);
        }
    }

    // d'^{i0-n-1}: old differential stacked over λ_n blocks.
    {
        let src = c.term(i0 - nn - 1);
        let tgt = terms.get(&(i0 - nn)).cloned().unwrap_or_default();
        if !src.is_empty() && !tgt.is_empty() {
            let d_old = c.diff(i0 - nn - 1);
            let old_rows = c.term(i0 - nn).len();
            let rn = r_term(nn).len();
            let mut m = PolyMatrix::zero_map(n, &tgt, &src);
            for rr in 0..old_rows {
                for cc in 0..src.len() {
                    m.set(rr, cc, d_old.get(rr, cc).clone());
                }
            }
            for s in 0..k {
                let lam = &lambdas[nn as usize][s];
                for rr in 0..rn {
                    for cc in 0..src.len() {
                        m.set(old_rows + s * rn + rr, cc, lam.get(rr, cc).clone());
                    }
                }
            }
            if !m.is_zero() {
                diffs.insert(i0 - nn - 1, m);
            }
        }
    }

    LineBundleComplex::new(n, terms, diffs)
}

/// Raising is lowering conjugated by duality: `O(d)` with `d < -n` in `C`
/// is `O(-d)` with `-d > 0` in the dual complex.
fn substitute_raise(c: &LineBundleComplex, i0: i64, d: i64) -> Result<LineBundleComplex> {
    let dualized = c.dual();
    let substituted = substitute_lower(&dualized, -i0, -d)?;
    Ok(substituted.dual())
}

/// Solves `M ∘ X_s = T_s` for polynomial matrices `X_s` (one per batch
/// entry) with homogeneity prescribed by the twist data, sharing one
/// elimination per distinct column twist across the whole batch.
fn solve_poly_batch(
    n: usize,
    m: &PolyMatrix,
    m_tgt: &FreeTerm,
    m_src: &FreeTerm,
    targets: &[PolyMatrix],
    v: &FreeTerm,
) -> Result<Vec<PolyMatrix>> {
    let mut out: Vec<PolyMatrix> = targets
        .iter()
        .map(|_| PolyMatrix::zero_map(n, m_src, v))
        .collect();
    if v.is_empty() || m_src.is_empty() {
        return Ok(out);
    }
    // Group the columns of v by twist: they share the scalar system.
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for cidx in 0..v.len() {
        groups.entry(v.twist(cidx).0).or_default().push(cidx);
    }
    for (&w, cols) in &groups {
        let t = -w;
        let lhs = graded_piece_matrix(m, m_tgt, m_src, n, t);
        let tgt_dims: Vec<usize> = (0..m_tgt.len())
            .map(|r| graded_dim(n, t + m_tgt.twist(r).0))
            .collect();
        let src_dims: Vec<usize> = (0..m_src.len())
            .map(|r| graded_dim(n, t + m_src.twist(r).0))
            .collect();
        let tgt_off = crate::koszul::offsets(&tgt_dims);
        let src_off = crate::koszul::offsets(&src_dims);
        let total_tgt: usize = tgt_dims.iter().sum();
        // Stack RHS columns: (batch entry, column of v).
        let width = targets.len() * cols.len();
        let mut rhs = crate::matrix::ExactMatrix::zeros(total_tgt, width);
        for (bi, tmat) in targets.iter().enumerate() {
            for (ci, &cidx) in cols.iter().enumerate() {
                for r in 0..m_tgt.len() {
                    let p = tmat.get(r, cidx);
                    if p.is_zero() {
                        continue;
                    }
                    for (mi, coeff) in p.coeff_vector().into_iter().enumerate() {
                        if !coeff.is_zero() {
                            rhs.set(tgt_off[r] + mi, bi * cols.len() + ci, coeff);
                        }
                    }
                }
            }
        }
        let sol = lhs.solve(&rhs).ok_or_else(|| {
            Error::Internal(
                "Koszul lifting system unsolvable; exactness should guarantee a solution".into(),
            )
        })?;
        for (bi, xmat) in out.iter_mut().enumerate() {
            for (ci, &cidx) in cols.iter().enumerate() {
                let col = bi * cols.len() + ci;
                for r in 0..m_src.len() {
                    let deg = t + m_src.twist(r).0;
                    let dim = src_dims[r];
                    if dim == 0 {
                        continue;
                    }
                    let coords: Vec<crate::scalar::Scalar> =
                        (0..dim).map(|mi| sol.get(src_off[r] + mi, col)).collect();
                    if coords.iter().all(crate::scalar::Scalar::is_zero) {
                        continue;
                    }
                    xmat.set(r, cidx, HomogPoly::from_coeff_vector(n, deg, &coords));
                }
            }
        }
    }
    Ok(out)
}

/// An object in the window is zero iff it has no Exts from any generator
/// `O(-i)`, `i = 0..n`.
pub fn is_zero_object(c: &WindowComplex) -> Result<bool> {
    if c.as_complex().is_zero_complex() {
        return Ok(true);
    }
    let n = c.as_complex().n();
    for i in 0..=n as i64 {
        let gen = LineBundleComplex::line_bundle(n, -i);
        let t = ext_table_reduced(&gen, c.as_complex());
        if !t.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A chain map is a quasi-isomorphism iff its cone is the zero object.
pub fn is_quasi_iso(f: &ChainMap) -> Result<bool> {
    let c = cone(f)?;
    let w = reduce_to_window(&c)?;
    is_zero_object(&w)
}

/// Beilinson monad multiplicities: `m[i][k] = dim H^k(P^n, C ⊗ Ω^i(i))`,
/// the number of `O(-i)` summands the monad places in position `k`.
/// Returned as one table per `i = 0..n`.
pub fn beilinson_multiplicities(c: &LineBundleComplex) -> Result<Vec<ExtTable>> {
    c.validate().map_err(Error::from)?;
    let n = c.n();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let omega = omega_twisted_resolution(n, i);
        let tensored = c.tensor(&omega)?;
        let w = reduce_to_window(&tensored)?;
        out.push(crate::ext::sheaf_cohomology(w.as_complex())?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::LineBundleComplex;

    #[test]
    fn window_wrapper_enforces_bounds() {
        assert!(WindowComplex::try_new(LineBundleComplex::line_bundle(2, -1)).is_ok());
        assert!(WindowComplex::try_new(LineBundleComplex::line_bundle(2, 1)).is_err());
        assert!(WindowComplex::try_new(LineBundleComplex::line_bundle(2, -3)).is_err());
    }

    #[test]
    fn reduce_is_prune_inside_window() {
        let c = LineBundleComplex::line_bundle(2, -2);
        let w = reduce_to_window(&c).unwrap();
        assert_eq!(w.as_complex(), &c);
    }

    #[test]
    fn euler_replacement_of_o1_on_p1() {
        // O(1)[0] on P^1 becomes [O(-1) -> O^2] in degrees -1..0.
        let c = LineBundleComplex::line_bundle(1, 1);
        let w = reduce_to_window(&c).unwrap();
        assert_eq!(w.as_complex().support(), vec![-1, 0]);
        assert_eq!(w.as_complex().term(-1).0, vec![Twist(-1)]);
        assert_eq!(w.as_complex().term(0).0, vec![Twist(0), Twist(0)]);
        assert!(w.as_complex().validate().is_ok());
    }

    #[test]
    fn koszul_raising_of_om2_on_p1() {
        // O(-2)[0] on P^1 becomes [O(-1)^2 -> O] in degrees 0..1.
        let c = LineBundleComplex::line_bundle(1, -2);
        let w = reduce_to_window(&c).unwrap();
        assert_eq!(w.as_complex().support(), vec![0, 1]);
        assert_eq!(w.as_complex().term(0).0, vec![Twist(-1), Twist(-1)]);
        assert_eq!(w.as_complex().term(1).0, vec![Twist(0)]);
    }

    #[test]
    fn koszul_raising_of_om3_on_p2() {
        // Terms O(-2)^3, O(-1)^3, O in degrees 0..2.
        let c = LineBundleComplex::line_bundle(2, -3);
        let w = reduce_to_window(&c).unwrap();
        assert_eq!(w.as_complex().support(), vec![0, 1, 2]);
        assert_eq!(w.as_complex().term(0).0, vec![Twist(-2); 3]);
        assert_eq!(w.as_complex().term(1).0, vec![Twist(-1); 3]);
        assert_eq!(w.as_complex().term(2).0, vec![Twist(0)]);
    }
}
