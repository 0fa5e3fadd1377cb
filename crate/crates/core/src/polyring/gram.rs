//! Per-degree monomial tables: sparse matrices of the Dunkl operators in the
//! monomial basis and the Fischer Gram matrices G_d[a][b] = [x^a, x^b]_{μ,1}.
//!
//! The Gram recursion uses the adjoint identity [x_i·p, q] = [p, T_i q],
//! which reduces a degree-d pairing to degree d−1 data. Gram–Schmidt, the
//! kernel-block linear solves, and the holomorphic-space pairings all run on
//! these tables instead of re-applying operators.

use super::dunkl::{dunkl_apply, DunklContext};
use super::{monomials_of_degree, Coeff, Exp, Poly, RPoly};
use num::One;
use crate::error::{DunklError, Result};
use crate::scalar::Rat;
use num::Zero;
use std::collections::HashMap;

/// Sparse vector over the degree-(d−1) monomial index set.
pub type SparseVec = Vec<(usize, Rat)>;

pub struct DegreeData {
    pub monomials: Vec<Exp>,
    pub index: HashMap<Exp, usize>,
    /// dunkl_cols[i][b] = T_{e_i} x^(monomials[b]) expanded over the
    /// degree-(d−1) monomials.
    pub dunkl_cols: Vec<Vec<SparseVec>>,
    /// gram[a][b] = [x^a, x^b]_{μ,1}; symmetric positive definite for μ ≥ 0.
    pub gram: Vec<Vec<Rat>>,
}

pub struct MonomialCalc {
    nvars: usize,
    degrees: Vec<DegreeData>,
}

impl MonomialCalc {
    /// Build tables for degrees 0..=max_degree (exact regime only).
    pub fn build(ctx: &DunklContext, max_degree: usize) -> Result<MonomialCalc> {
        if !ctx.is_exact() {
            return Err(DunklError::FloatingRegime(
                "monomial Gram tables need the exact regime".into(),
            ));
        }
        let n = ctx.dim();
        let mut degrees: Vec<DegreeData> = Vec::with_capacity(max_degree + 1);
        for d in 0..=max_degree {
            let monomials = monomials_of_degree(n, d);
            let index: HashMap<Exp, usize> = monomials
                .iter()
                .enumerate()
                .map(|(i, e)| (e.clone(), i))
                .collect();
            let mut dunkl_cols: Vec<Vec<SparseVec>> = vec![Vec::new(); n];
            if d > 0 {
                let prev = &degrees[d - 1];
                for (i, cols) in dunkl_cols.iter_mut().enumerate() {
                    let mut xi = vec![Rat::zero(); n];
                    xi[i] = Rat::one();
                    for b in &monomials {
                        let p = RPoly::monomial(n, b.clone(), Rat::one());
                        let tp = dunkl_apply(ctx, &xi, &p)?;
                        let mut sparse: SparseVec = tp
                            .terms()
                            .map(|(e, c)| (prev.index[e], c.clone()))
                            .collect();
                        sparse.sort_by_key(|(j, _)| *j);
                        cols.push(sparse);
                    }
                }
            }
            // Gram via [x^a, x^b] = [x^{a−e_i}, T_i x^b]
            let m = monomials.len();
            let mut gram = vec![vec![Rat::zero(); m]; m];
            if d == 0 {
                gram[0][0] = Rat::one();
            } else {
                let prev = &degrees[d - 1];
                for (ai, a) in monomials.iter().enumerate() {
                    let i = a.iter().position(|&k| k > 0).unwrap();
                    let mut a_prev = a.clone();
                    a_prev[i] -= 1;
                    let ap = prev.index[&a_prev];
                    for (bi, _) in monomials.iter().enumerate() {
                        let mut acc = Rat::zero();
                        for (j, c) in &dunkl_cols[i][bi] {
                            acc += c * &prev.gram[ap][*j];
                        }
                        gram[ai][bi] = acc;
                    }
                }
            }
            degrees.push(DegreeData {
                monomials,
                index,
                dunkl_cols,
                gram,
            });
        }
        Ok(MonomialCalc { nvars: n, degrees })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.len() - 1
    }

    pub fn degree(&self, d: usize) -> Result<&DegreeData> {
        self.degrees
            .get(d)
            .ok_or_else(|| DunklError::Range(format!("degree {d} beyond built tables")))
    }

    /// Coordinates of a homogeneous degree-d polynomial over the monomial list.
    pub fn coords_of<C: Coeff>(&self, d: usize, p: &Poly<C>) -> Result<Vec<C>> {
        let data = self.degree(d)?;
        let mut v = vec![C::zero(); data.monomials.len()];
        for (e, c) in p.terms() {
            let idx = data
                .index
                .get(e)
                .ok_or_else(|| DunklError::Range("exponent outside degree block".into()))?;
            v[*idx] = c.clone();
        }
        Ok(v)
    }

    pub fn poly_from_coords(&self, d: usize, coords: &[Rat]) -> Result<RPoly> {
        let data = self.degree(d)?;
        let mut p = RPoly::zero(self.nvars);
        for (i, c) in coords.iter().enumerate() {
            if !c.is_zero() {
                p.insert_add(data.monomials[i].clone(), c.clone());
            }
        }
        Ok(p)
    }

    /// [p, q]_{μ,1} for homogeneous same-degree coordinate vectors.
    pub fn gram_pair(&self, d: usize, p: &[Rat], q: &[Rat]) -> Result<Rat> {
        let data = self.degree(d)?;
        let mut acc = Rat::zero();
        for (ai, pa) in p.iter().enumerate() {
            if pa.is_zero() {
                continue;
            }
            let row = &data.gram[ai];
            let mut inner = Rat::zero();
            for (bi, qb) in q.iter().enumerate() {
                if !qb.is_zero() {
                    inner += &row[bi] * qb;
                }
            }
            acc += pa * inner;
        }
        Ok(acc)
    }
}
