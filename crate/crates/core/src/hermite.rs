//! The Fischer-orthogonal graded basis q_ν (φ_ν = q_ν/√r_ν after
//! normalization) and the generalized Hermite polynomials H_{t;ν} and
//! Hermite functions h_{t;ν}.
//!
//! Everything irrational is quarantined: the stored basis is the
//! un-normalized rational q_ν together with its exact squared norm
//! r_ν = [q_ν,q_ν]_{μ,1}, and the t-dilated, normalized objects are
//! recovered through the single scalar (t^{|ν|} r_ν)^{-1/2} at evaluation
//! time. In particular Ĥ_{t;ν} := e^{-tΔ_μ/2} q_ν is rational and
//! H_{t;ν} = (t^{|ν|} r_ν)^{-1/2} Ĥ_{t;ν}.

use crate::error::{DunklError, Result};
use crate::polyring::{
    exp_total, heat_apply, monomials_of_degree, CPoly, DunklContext, Exp, MonomialCalc, RPoly,
};
use crate::scalar::{rat_pow, rat_to_f64, Rat};
use num::complex::Complex64;
use num::{One, Signed, Zero};
use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

/// Within-degree monomial ordering used by Gram–Schmidt. The basis itself
/// depends on this; every verified identity downstream is order-free.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegreeOrder {
    GradedLex,
    GradedRevLex,
}

#[derive(Clone, Debug)]
pub struct BasisItem {
    pub nu: Exp,
    pub degree: usize,
    /// Coordinates of q_ν over the graded-lex monomial list of its degree.
    pub coords: Vec<Rat>,
    /// r_ν = [q_ν, q_ν]_{μ,1} > 0.
    pub r: Rat,
}

pub struct OrthogonalBasis {
    pub ctx: Arc<DunklContext>,
    pub order: DegreeOrder,
    pub max_degree: usize,
    pub calc: MonomialCalc,
    items: Vec<BasisItem>,
    by_nu: HashMap<Exp, usize>,
    degree_ranges: Vec<(usize, usize)>,
}

impl OrthogonalBasis {
    /// Gram–Schmidt over monomials within each degree (cross-degree pairs are
    /// orthogonal for free since the polynomials are homogeneous).
    pub fn build(ctx: Arc<DunklContext>, max_degree: usize, order: DegreeOrder) -> Result<Self> {
        if !ctx.is_exact() {
            return Err(DunklError::FloatingRegime(
                "orthogonal basis construction needs the exact regime".into(),
            ));
        }
        let calc = MonomialCalc::build(&ctx, max_degree)?;
        let mut items = Vec::new();
        let mut by_nu = HashMap::new();
        let mut degree_ranges = Vec::new();
        for d in 0..=max_degree {
            let start = items.len();
            let data = calc.degree(d)?;
            let m = data.monomials.len();
            let mut sequence: Vec<usize> = (0..m).collect();
            if order == DegreeOrder::GradedRevLex {
                sequence.reverse();
            }
            // per accepted item: coords, G·coords, r
            let mut done: Vec<(Vec<Rat>, Vec<Rat>, Rat)> = Vec::new();
            for &mi in &sequence {
                let mut v = vec![Rat::zero(); m];
                v[mi] = Rat::one();
                for (qc, gq, r) in &done {
                    // [x^mi, q_j] = (G q_j)[mi]
                    let c = &gq[mi] / r;
                    if c.is_zero() {
                        continue;
                    }
                    for (vi, qi) in v.iter_mut().zip(qc) {
                        *vi -= &c * qi;
                    }
                }
                let gv: Vec<Rat> = (0..m)
                    .map(|a| {
                        let mut acc = Rat::zero();
                        for (b, vb) in v.iter().enumerate() {
                            if !vb.is_zero() {
                                acc += &data.gram[a][b] * vb;
                            }
                        }
                        acc
                    })
                    .collect();
                let r: Rat = v
                    .iter()
                    .zip(&gv)
                    .map(|(a, b)| a * b)
                    .sum();
                if !r.is_positive() {
                    return Err(DunklError::Degeneracy(format!(
                        "pivot r_ν = {r} at ν = {:?}",
                        data.monomials[mi]
                    )));
                }
                let nu = data.monomials[mi].clone();
                by_nu.insert(nu.clone(), items.len());
                items.push(BasisItem {
                    nu,
                    degree: d,
                    coords: v.clone(),
                    r: r.clone(),
                });
                done.push((v, gv, r));
            }
            degree_ranges.push((start, items.len()));
        }
        Ok(OrthogonalBasis {
            ctx,
            order,
            max_degree,
            calc,
            items,
            by_nu,
            degree_ranges,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[BasisItem] {
        &self.items
    }

    pub fn index_of(&self, nu: &Exp) -> Result<usize> {
        self.by_nu
            .get(nu)
            .copied()
            .ok_or_else(|| DunklError::Range(format!("ν = {nu:?} not in built basis")))
    }

    pub fn item(&self, nu: &Exp) -> Result<&BasisItem> {
        Ok(&self.items[self.index_of(nu)?])
    }

    pub fn items_of_degree(&self, d: usize) -> Result<&[BasisItem]> {
        let (a, b) = *self
            .degree_ranges
            .get(d)
            .ok_or_else(|| DunklError::Range(format!("degree {d} beyond basis")))?;
        Ok(&self.items[a..b])
    }

    /// All multi-indices with |ν| ≤ cap, in basis order.
    pub fn indices_up_to(&self, cap: usize) -> Vec<Exp> {
        self.items
            .iter()
            .filter(|it| it.degree <= cap)
            .map(|it| it.nu.clone())
            .collect()
    }

    pub fn q_poly(&self, nu: &Exp) -> Result<RPoly> {
        let item = self.item(nu)?;
        self.calc.poly_from_coords(item.degree, &item.coords)
    }

    pub fn r(&self, nu: &Exp) -> Result<&Rat> {
        Ok(&self.item(nu)?.r)
    }

    /// CSV rows: nu, degree, r, then "exponents:coeff" terms.
    pub fn emit_csv(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "nu,degree,r,terms")?;
        for item in &self.items {
            let q = self
                .calc
                .poly_from_coords(item.degree, &item.coords)
                .expect("coords valid");
            let nu_s: Vec<String> = item.nu.iter().map(|k| k.to_string()).collect();
            let terms: Vec<String> = q
                .terms()
                .map(|(e, c)| {
                    let es: Vec<String> = e.iter().map(|k| k.to_string()).collect();
                    format!("{}:{}", es.join(";"), crate::scalar::rat_to_string(c))
                })
                .collect();
            writeln!(
                w,
                "{},{},{},{}",
                nu_s.join(";"),
                item.degree,
                crate::scalar::rat_to_string(&item.r),
                terms.join(" ")
            )?;
        }
        Ok(())
    }
}

/// Generalized Hermite family at a fixed t: Ĥ_{t;ν} = e^{-tΔ_μ/2} q_ν kept
/// rational, squared norms t^{|ν|} r_ν kept exact.
pub struct HermiteFamily {
    pub t: Rat,
    pub basis: Arc<OrthogonalBasis>,
    hhat: Vec<RPoly>,
}

impl HermiteFamily {
    pub fn build(basis: Arc<OrthogonalBasis>, t: Rat) -> Result<Self> {
        if !t.is_positive() {
            return Err(DunklError::InvalidParameter("t must be > 0".into()));
        }
        let mut hhat = Vec::with_capacity(basis.len());
        for item in basis.items() {
            let q = basis.calc.poly_from_coords(item.degree, &item.coords)?;
            let minus_t = -t.clone();
            hhat.push(heat_apply(&basis.ctx, &minus_t, &q)?);
        }
        Ok(HermiteFamily { t, basis, hhat })
    }

    fn idx(&self, nu: &Exp) -> Result<usize> {
        self.basis.index_of(nu)
    }

    /// Ĥ_{t;ν} (rational, un-normalized).
    pub fn hermite_unnormalized(&self, nu: &Exp) -> Result<&RPoly> {
        Ok(&self.hhat[self.idx(nu)?])
    }

    /// ⟨Ĥ_{t;ν}, Ĥ_{t;ν}⟩_{L²(m_{μ,t})} = t^{|ν|} r_ν, exact.
    pub fn norm_sq(&self, nu: &Exp) -> Result<Rat> {
        let item = self.basis.item(nu)?;
        Ok(rat_pow(&self.t, item.degree as i64) * &item.r)
    }

    /// The normalization scalar (t^{|ν|} r_ν)^{-1/2} shared by H_{t;ν} and φ_{t;ν}.
    pub fn norm_scale_f64(&self, nu: &Exp) -> Result<f64> {
        Ok(1.0 / rat_to_f64(&self.norm_sq(nu)?).sqrt())
    }

    /// H_{t;ν} as a complex-float polynomial (its coefficients carry 1/√r_ν).
    pub fn hermite_polynomial(&self, nu: &Exp) -> Result<CPoly> {
        let scale = Complex64::new(self.norm_scale_f64(nu)?, 0.0);
        Ok(self.hermite_unnormalized(nu)?.to_complex().scale(&scale))
    }

    /// h_{t;ν}(x) = e^{-x²/4t} H_{t;ν}(x).
    pub fn hermite_function_eval(&self, nu: &Exp, x: &[f64]) -> Result<f64> {
        let hhat = self.hermite_unnormalized(nu)?;
        let scale = self.norm_scale_f64(nu)?;
        let x_sq: f64 = x.iter().map(|c| c * c).sum();
        let t = rat_to_f64(&self.t);
        Ok((-x_sq / (4.0 * t)).exp() * hhat.eval_f64(x) * scale)
    }

    /// φ_{t;ν} = (t^{|ν|} r_ν)^{-1/2} q_ν evaluated at a complex point.
    pub fn phi_t_eval(&self, nu: &Exp, z: &[Complex64]) -> Result<Complex64> {
        let q = self.basis.q_poly(nu)?;
        let scale = self.norm_scale_f64(nu)?;
        Ok(q.to_complex().eval(z) * scale)
    }
}

/// Leading multi-indices with |ν| ≤ cap in graded-lex order (helper for
/// callers that iterate spans).
pub fn multi_indices_up_to(nvars: usize, cap: usize) -> Vec<Exp> {
    let mut out = Vec::new();
    for d in 0..=cap {
        out.extend(monomials_of_degree(nvars, d));
    }
    out
}

/// Total degree of a multi-index (re-export convenience).
pub fn degree_of(nu: &Exp) -> usize {
    exp_total(nu)
}
