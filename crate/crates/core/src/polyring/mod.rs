//! Exact multivariate polynomial arithmetic and the Dunkl operator calculus
//! on it.
//!
//! Polynomials are finitely supported maps from exponent multi-indices to
//! coefficients. Two coefficient kinds are used: exact rationals (the default
//! for everything the verification suite asserts with zero tolerance) and
//! complex doubles (kernel evaluation at complex points, holomorphic images).

mod dunkl;
mod gram;

pub use dunkl::{
    dilate, dilate_sqrt_exact, dunkl_apply, dunkl_apply_block, dunkl_laplacian,
    dunkl_laplacian_frame, fischer_pair, gaussian_moment, gaussian_moment_scaled, heat_apply,
    momentum_apply, multiply_coordinate, scaled_moment_prefactor, DunklContext,
};
pub use gram::MonomialCalc;

use crate::error::{DunklError, Result};
use crate::scalar::{rat_to_f64, CRat, Rat};
use num::complex::Complex64;
use num::{One, ToPrimitive, Zero};
use smallvec::SmallVec;
use std::collections::BTreeMap;
use std::fmt;

/// Exponent multi-index κ ∈ ℤ₊^N.
pub type Exp = SmallVec<[u16; 6]>;

pub fn exp_total(e: &Exp) -> usize {
    e.iter().map(|&k| k as usize).sum()
}

pub fn exp_zero(nvars: usize) -> Exp {
    SmallVec::from_elem(0u16, nvars)
}

pub fn exp_unit(nvars: usize, i: usize) -> Exp {
    let mut e = exp_zero(nvars);
    e[i] = 1;
    e
}

/// All multi-indices of total degree `d` in `nvars` variables, graded-lex
/// order (x₁-dominant first).
pub fn monomials_of_degree(nvars: usize, d: usize) -> Vec<Exp> {
    fn rec(nvars: usize, d: usize, prefix: &mut Exp, out: &mut Vec<Exp>) {
        if prefix.len() + 1 == nvars {
            let mut e = prefix.clone();
            e.push(d as u16);
            out.push(e);
            return;
        }
        for k in (0..=d).rev() {
            prefix.push(k as u16);
            rec(nvars, d - k, prefix, out);
            prefix.pop();
        }
    }
    if nvars == 0 {
        return if d == 0 { vec![Exp::new()] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(nvars, d, &mut Exp::new(), &mut out);
    out
}

/// Coefficient field abstraction: exact rationals or complex doubles.
/// Zero/one/zero-testing come from the standard `num` traits.
pub trait Coeff:
    Clone + PartialEq + fmt::Debug + Send + Sync + 'static + Zero + One
{
    const EXACT: bool;
    fn add_ref(&self, o: &Self) -> Self;
    fn sub_ref(&self, o: &Self) -> Self;
    fn mul_ref(&self, o: &Self) -> Self;
    fn div_ref(&self, o: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn from_rat(r: &Rat) -> Self;
    fn conjugate(&self) -> Self;
    /// |coefficient| as f64, for tolerance decisions and reporting.
    fn magnitude(&self) -> f64;
}

impl Coeff for Rat {
    const EXACT: bool = true;
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn div_ref(&self, o: &Self) -> Self {
        self / o
    }
    fn neg_ref(&self) -> Self {
        -self.clone()
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn conjugate(&self) -> Self {
        self.clone()
    }
    fn magnitude(&self) -> f64 {
        rat_to_f64(self).abs()
    }
}

impl Coeff for Complex64 {
    const EXACT: bool = false;
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn div_ref(&self, o: &Self) -> Self {
        self / o
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn from_rat(r: &Rat) -> Self {
        Complex64::new(rat_to_f64(r), 0.0)
    }
    fn conjugate(&self) -> Self {
        self.conj()
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Sparse multivariate polynomial. No zero coefficients are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<C: Coeff> {
    nvars: usize,
    terms: BTreeMap<Exp, C>,
}

pub type RPoly = Poly<Rat>;
pub type CPoly = Poly<Complex64>;

impl<C: Coeff> Poly<C> {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(exp_zero(nvars), c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, C::one())
    }

    pub fn monomial(nvars: usize, e: Exp, c: C) -> Self {
        debug_assert_eq!(e.len(), nvars);
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(e, c);
        }
        p
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        Poly::monomial(nvars, exp_unit(nvars, i), C::one())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Exp) -> C {
        self.terms.get(e).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&exp_zero(self.nvars))
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(exp_total).max().unwrap_or(0)
    }

    pub fn max_coeff_magnitude(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.magnitude())
            .fold(0.0, f64::max)
    }

    /// Accumulate `scale · other` into self.
    pub fn add_scaled_assign(&mut self, other: &Poly<C>, scale: &C) {
        debug_assert_eq!(self.nvars, other.nvars);
        if scale.is_zero() {
            return;
        }
        for (e, c) in &other.terms {
            let v = c.mul_ref(scale);
            self.insert_add(e.clone(), v);
        }
    }

    pub fn insert_add(&mut self, e: Exp, v: C) {
        if v.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(v);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                let s = slot.get().add_ref(&v);
                if s.is_zero() {
                    slot.remove();
                } else {
                    *slot.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        out.add_scaled_assign(other, &C::one());
        out
    }

    pub fn sub(&self, other: &Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        out.add_scaled_assign(other, &C::one().neg_ref());
        out
    }

    pub fn neg(&self) -> Poly<C> {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), c.neg_ref());
        }
        out
    }

    pub fn scale(&self, s: &C) -> Poly<C> {
        let mut out = Poly::zero(self.nvars);
        if s.is_zero() {
            return out;
        }
        for (e, c) in &self.terms {
            let v = c.mul_ref(s);
            if !v.is_zero() {
                out.terms.insert(e.clone(), v);
            }
        }
        out
    }

    pub fn mul(&self, other: &Poly<C>) -> Poly<C> {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exp = ea.iter().zip(eb.iter()).map(|(x, y)| x + y).collect();
                out.insert_add(e, ca.mul_ref(cb));
            }
        }
        out
    }

    pub fn eval(&self, point: &[C]) -> C {
        debug_assert_eq!(point.len(), self.nvars);
        // cache powers per variable up to the needed exponent
        let mut max_exp = vec![0u16; self.nvars];
        for e in self.terms.keys() {
            for (m, &k) in max_exp.iter_mut().zip(e.iter()) {
                *m = (*m).max(k);
            }
        }
        let powers: Vec<Vec<C>> = (0..self.nvars)
            .map(|i| {
                let mut v = Vec::with_capacity(max_exp[i] as usize + 1);
                v.push(C::one());
                for k in 1..=max_exp[i] as usize {
                    let next = v[k - 1].mul_ref(&point[i]);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = C::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.mul_ref(&powers[i][k as usize]);
                }
            }
            acc = acc.add_ref(&t);
        }
        acc
    }

    /// ∂/∂x_j.
    pub fn partial_derivative(&self, j: usize) -> Poly<C> {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e[j];
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[j] = k - 1;
            let factor = C::from_rat(&Rat::from(num::BigInt::from(k)));
            out.insert_add(e2, c.mul_ref(&factor));
        }
        out
    }

    /// ⟨ξ, grad⟩.
    pub fn directional_derivative(&self, xi: &[C]) -> Poly<C> {
        let mut out = Poly::zero(self.nvars);
        for (j, w) in xi.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            out.add_scaled_assign(&self.partial_derivative(j), w);
        }
        out
    }

    /// Substitute x ↦ M·x (rows[i] is the i-th row of M, i.e. the linear form
    /// replacing x_i). Signed-permutation matrices take a fast monomial path.
    pub fn compose_linear(&self, rows: &[Vec<C>]) -> Poly<C> {
        debug_assert_eq!(rows.len(), self.nvars);
        // fast path: each row has exactly one nonzero entry
        let mut perm: Vec<(usize, C)> = Vec::with_capacity(self.nvars);
        let mut is_signed_perm = true;
        'rows: for row in rows {
            let mut found = None;
            for (j, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    if found.is_some() {
                        is_signed_perm = false;
                        break 'rows;
                    }
                    found = Some((j, c.clone()));
                }
            }
            match found {
                Some(pair) => perm.push(pair),
                None => {
                    is_signed_perm = false;
                    break;
                }
            }
        }
        if is_signed_perm {
            let mut out = Poly::zero(self.nvars);
            for (e, c) in &self.terms {
                let mut e2 = exp_zero(self.nvars);
                let mut coeff = c.clone();
                for (i, &k) in e.iter().enumerate() {
                    if k == 0 {
                        continue;
                    }
                    let (j, ref w) = perm[i];
                    e2[j] += k;
                    let mut wp = C::one();
                    for _ in 0..k {
                        wp = wp.mul_ref(w);
                    }
                    coeff = coeff.mul_ref(&wp);
                }
                out.insert_add(e2, coeff);
            }
            return out;
        }
        // general path: memoize powers of the row linear forms
        let forms: Vec<Poly<C>> = rows
            .iter()
            .map(|row| {
                let mut f = Poly::zero(self.nvars);
                for (j, c) in row.iter().enumerate() {
                    if !c.is_zero() {
                        f.insert_add(exp_unit(self.nvars, j), c.clone());
                    }
                }
                f
            })
            .collect();
        let mut power_cache: Vec<Vec<Poly<C>>> =
            (0..self.nvars).map(|_| vec![Poly::one(self.nvars)]).collect();
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut term = Poly::constant(self.nvars, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while power_cache[i].len() <= k as usize {
                    let next = power_cache[i].last().unwrap().mul(&forms[i]);
                    power_cache[i].push(next);
                }
                term = term.mul(&power_cache[i][k as usize]);
            }
            out.add_scaled_assign(&term, &C::one());
        }
        out
    }

    /// Synthetic division by the linear form ⟨form, x⟩. Returns (quotient,
    /// remainder); the remainder has degree 0 in the pivot variable.
    pub fn divide_linear(&self, form: &[C]) -> Result<(Poly<C>, Poly<C>)> {
        let pivot = form
            .iter()
            .position(|c| !c.is_zero())
            .ok_or_else(|| DunklError::InvalidRoot("zero linear form".into()))?;
        let c_pivot = form[pivot].clone();
        // m = the remaining part of the form (degree 0 in pivot)
        let mut m = Poly::zero(self.nvars);
        for (j, c) in form.iter().enumerate() {
            if j != pivot && !c.is_zero() {
                m.insert_add(exp_unit(self.nvars, j), c.clone());
            }
        }
        // levels[k] = coefficient of x_pivot^k, as a poly with pivot slot 0
        let mut levels: BTreeMap<u16, Poly<C>> = BTreeMap::new();
        for (e, c) in &self.terms {
            let k = e[pivot];
            let mut e2 = e.clone();
            e2[pivot] = 0;
            levels
                .entry(k)
                .or_insert_with(|| Poly::zero(self.nvars))
                .insert_add(e2, c.clone());
        }
        let mut quot = Poly::zero(self.nvars);
        let kmax = levels.keys().next_back().copied().unwrap_or(0);
        for k in (1..=kmax).rev() {
            let Some(level) = levels.remove(&k) else { continue };
            if level.is_zero() {
                continue;
            }
            // t = level / c_pivot goes into the quotient at pivot power k−1
            let inv = C::one().div_ref(&c_pivot);
            let t = level.scale(&inv);
            for (e, c) in &t.terms {
                let mut e2 = e.clone();
                e2[pivot] = k - 1;
                quot.insert_add(e2, c.clone());
            }
            // levels[k−1] −= t·m
            let tm = t.mul(&m);
            let lower = levels.entry(k - 1).or_insert_with(|| Poly::zero(self.nvars));
            lower.add_scaled_assign(&tm, &C::one().neg_ref());
        }
        let rem = levels.remove(&0).unwrap_or_else(|| Poly::zero(self.nvars));
        Ok((quot, rem))
    }

    pub fn homogeneous_component(&self, d: usize) -> Poly<C> {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if exp_total(e) == d {
                out.terms.insert(e.clone(), c.clone());
            }
        }
        out
    }

    pub fn homogeneous_parts(&self) -> BTreeMap<usize, Poly<C>> {
        let mut parts: BTreeMap<usize, Poly<C>> = BTreeMap::new();
        for (e, c) in &self.terms {
            parts
                .entry(exp_total(e))
                .or_insert_with(|| Poly::zero(self.nvars))
                .terms
                .insert(e.clone(), c.clone());
        }
        parts
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(exp_total);
        match degs.next() {
            None => true,
            Some(d0) => degs.all(|d| d == d0),
        }
    }

    pub fn map_coeffs<C2: Coeff>(&self, f: impl Fn(&C) -> C2) -> Poly<C2> {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            let v = f(c);
            if !v.is_zero() {
                out.terms.insert(e.clone(), v);
            }
        }
        out
    }
}

impl RPoly {
    pub fn to_complex(&self) -> CPoly {
        self.map_coeffs(Complex64::from_rat)
    }

    /// Exact evaluation at a complex-rational point.
    pub fn eval_crat(&self, point: &[CRat]) -> CRat {
        let mut max_exp = vec![0u16; self.nvars];
        for e in self.terms.keys() {
            for (m, &k) in max_exp.iter_mut().zip(e.iter()) {
                *m = (*m).max(k);
            }
        }
        let powers: Vec<Vec<CRat>> = (0..self.nvars)
            .map(|i| {
                let mut v = vec![CRat::one()];
                for k in 1..=max_exp[i] as usize {
                    let next = v[k - 1].mul(&point[i]);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = CRat::zero();
        for (e, c) in &self.terms {
            let mut t = CRat::from_rat(c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.mul(&powers[i][k as usize]);
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        let pt: Vec<Complex64> = point.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.to_complex().eval(&pt).re
    }
}

/// JSON form used in reports: {"exponents": [...], "coeff": "num/den"}.
pub fn rpoly_to_json(p: &RPoly) -> serde_json::Value {
    let terms: Vec<serde_json::Value> = p
        .terms()
        .map(|(e, c)| {
            serde_json::json!({
                "exponents": e.iter().map(|&k| k as u64).collect::<Vec<_>>(),
                "coeff": crate::scalar::rat_to_string(c),
            })
        })
        .collect();
    serde_json::json!(terms)
}

pub fn cpoly_to_json(p: &CPoly) -> serde_json::Value {
    let terms: Vec<serde_json::Value> = p
        .terms()
        .map(|(e, c)| {
            serde_json::json!({
                "exponents": e.iter().map(|&k| k as u64).collect::<Vec<_>>(),
                "coeff": [c.re, c.im],
            })
        })
        .collect();
    serde_json::json!(terms)
}

/// Parse a polynomial back from the report JSON (round-trip support).
pub fn rpoly_from_json(nvars: usize, v: &serde_json::Value) -> Result<RPoly> {
    let arr = v
        .as_array()
        .ok_or_else(|| DunklError::Config("polynomial JSON must be an array".into()))?;
    let mut p = RPoly::zero(nvars);
    for term in arr {
        let exps = term["exponents"]
            .as_array()
            .ok_or_else(|| DunklError::Config("missing exponents".into()))?;
        let e: Exp = exps
            .iter()
            .map(|x| x.as_u64().and_then(|k| k.to_u16()))
            .collect::<Option<_>>()
            .ok_or_else(|| DunklError::Config("bad exponent".into()))?;
        let c = crate::scalar::parse_rational(
            term["coeff"]
                .as_str()
                .ok_or_else(|| DunklError::Config("missing coeff".into()))?,
        )?;
        p.insert_add(e, c);
    }
    Ok(p)
}
