//! The Dunkl kernel built degree by degree, plus the heat kernel, the
//! coherent-state kernels (versions A, B, C and the rescaled BSO form), and
//! the reproducing kernel.
//!
//! Blocks live in 2N variables: the first N are the x-block, the last N the
//! y-block, and E_n is homogeneous of degree n in each block separately.
//! Two constructions are kept permanently as mutual oracles:
//!
//! - a linear solve of T^x_{e_i} E_n = y_i E_{n−1} per degree (unique because
//!   no nonconstant homogeneous polynomial is killed by all Dunkl operators);
//! - the basis sum E_n(x,y) = Σ_{|ν|=n} q_ν(x) q_ν(y) / r_ν.
//!
//! Truncated evaluation carries the tail majorant Σ_{n>D} (|z||w|)ⁿ/n!. That
//! majorant is exact for μ ≡ 0 and validated empirically against the rank-one
//! coefficient recursion; reports flag it as heuristic.

use crate::error::{DunklError, Result};
use crate::hermite::OrthogonalBasis;
use crate::polyring::{dunkl_apply_block, exp_zero, DunklContext, Exp, MonomialCalc, RPoly};
use crate::scalar::{rat_pow, rat_to_f64, CRat, Rat};
use num::complex::Complex64;
use num::{One, Signed, Zero};
use smallvec::SmallVec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelMethod {
    LinearSolve,
    BasisSum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SbVersion {
    A,
    B,
    C,
    Bso,
}

pub struct KernelTable {
    pub nvars: usize,
    pub degree: usize,
    /// blocks[n] is E_n in 2N variables, bidegree (n, n).
    pub blocks: Vec<RPoly>,
    pub method: KernelMethod,
    pub cross_checked: bool,
    split_x: std::sync::OnceLock<Vec<Vec<(Exp, RPoly)>>>,
    split_y: std::sync::OnceLock<Vec<Vec<(Exp, RPoly)>>>,
}

impl KernelTable {
    fn from_blocks(
        nvars: usize,
        degree: usize,
        blocks: Vec<RPoly>,
        method: KernelMethod,
    ) -> Self {
        KernelTable {
            nvars,
            degree,
            blocks,
            method,
            cross_checked: false,
            split_x: std::sync::OnceLock::new(),
            split_y: std::sync::OnceLock::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct KernelEval {
    pub value: Complex64,
    pub truncation_degree: usize,
    /// Heuristic tail majorant Σ_{n>D} (|z||w|)ⁿ/n!.
    pub tail_estimate: f64,
}

/// Extra data for the BSO kernel: the measure exponent γ_μ + N/2 comes from
/// the context, the constant c_μ from quadrature.
#[derive(Clone, Debug)]
pub struct BsoParams {
    pub measure_exponent: Rat,
    pub c_mu: f64,
}

fn concat_exp(a: &Exp, b: &Exp) -> Exp {
    let mut e: Exp = SmallVec::with_capacity(a.len() + b.len());
    e.extend_from_slice(a);
    e.extend_from_slice(b);
    e
}

/// Exact over-determined solve by Gauss–Jordan elimination. `a` is m×k with
/// full column rank; `rhs` holds columns to solve for. Inconsistent systems
/// are an internal error (the eigen-problem always has a solution for μ ≥ 0).
fn solve_exact(a: &[Vec<Rat>], rhs: &[Vec<Rat>]) -> Result<Vec<Vec<Rat>>> {
    let m = a.len();
    let k = if m == 0 { 0 } else { a[0].len() };
    let nrhs = rhs.len();
    let mut aug: Vec<Vec<Rat>> = (0..m)
        .map(|r| {
            let mut row = a[r].clone();
            for col in rhs {
                row.push(col[r].clone());
            }
            row
        })
        .collect();
    let width = k + nrhs;
    let mut pivot_row_of_col = vec![usize::MAX; k];
    let mut row = 0usize;
    for col in 0..k {
        let Some(p) = (row..m).find(|&r| !aug[r][col].is_zero()) else {
            return Err(DunklError::InternalConsistency(
                "singular system in kernel block solve".into(),
            ));
        };
        aug.swap(row, p);
        let inv = aug[row][col].recip();
        for c in col..width {
            let v = &aug[row][c] * &inv;
            aug[row][c] = v;
        }
        for r in 0..m {
            if r != row && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                for c in col..width {
                    let sub = &f * &aug[row][c];
                    aug[r][c] -= sub;
                }
            }
        }
        pivot_row_of_col[col] = row;
        row += 1;
        if row == m {
            if col + 1 < k {
                return Err(DunklError::InternalConsistency(
                    "rank deficiency in kernel block solve".into(),
                ));
            }
            break;
        }
    }
    // remaining rows must be fully zero (consistency of the overdetermined system)
    for r in row..m {
        if aug[r].iter().any(|v| !v.is_zero()) {
            return Err(DunklError::InternalConsistency(
                "inconsistent kernel block system".into(),
            ));
        }
    }
    let mut out = Vec::with_capacity(nrhs);
    for j in 0..nrhs {
        let mut sol = Vec::with_capacity(k);
        for (col, &pr) in pivot_row_of_col.iter().enumerate() {
            let _ = col;
            sol.push(aug[pr][k + j].clone());
        }
        out.push(sol);
    }
    Ok(out)
}

/// Linear-solve construction: per degree n and per y-monomial b, find the
/// unique x-polynomial c_b with T_i c_b = (coefficient of y^{b−e_i} in E_{n−1}).
pub fn build_kernel_blocks(ctx: &DunklContext, max_degree: usize) -> Result<KernelTable> {
    if !ctx.is_exact() {
        return Err(DunklError::FloatingRegime(
            "exact kernel blocks need the exact regime".into(),
        ));
    }
    let n_dim = ctx.dim();
    let calc = MonomialCalc::build(ctx, max_degree)?;
    let mut blocks: Vec<RPoly> = vec![RPoly::one(2 * n_dim)];
    for deg in 1..=max_degree {
        let cur = calc.degree(deg)?;
        let prev = calc.degree(deg - 1)?;
        let dim_cur = cur.monomials.len();
        let dim_prev = prev.monomials.len();
        // stacked matrix of (T_1, ..., T_N): rows (i, prev-monomial), cols cur-monomial
        let mut a = vec![vec![Rat::zero(); dim_cur]; n_dim * dim_prev];
        for i in 0..n_dim {
            for (bcol, col) in cur.dunkl_cols[i].iter().enumerate() {
                for (j, c) in col {
                    a[i * dim_prev + j][bcol] = c.clone();
                }
            }
        }
        // group E_{n−1} by y-monomial: y-exp → x-coordinates
        let mut prev_groups: std::collections::HashMap<Exp, Vec<Rat>> =
            std::collections::HashMap::new();
        for (e, c) in blocks[deg - 1].terms() {
            let xe: Exp = e[..n_dim].iter().copied().collect();
            let ye: Exp = e[n_dim..].iter().copied().collect();
            let slot = prev_groups
                .entry(ye)
                .or_insert_with(|| vec![Rat::zero(); dim_prev]);
            slot[prev.index[&xe]] = c.clone();
        }
        // one RHS column per y-monomial b of degree n
        let y_monomials = &cur.monomials;
        let zero_prev = vec![Rat::zero(); dim_prev];
        let rhs: Vec<Vec<Rat>> = y_monomials
            .iter()
            .map(|b| {
                let mut col = Vec::with_capacity(n_dim * dim_prev);
                for i in 0..n_dim {
                    let coords = if b[i] > 0 {
                        let mut bm = b.clone();
                        bm[i] -= 1;
                        prev_groups.get(&bm).unwrap_or(&zero_prev)
                    } else {
                        &zero_prev
                    };
                    col.extend(coords.iter().cloned());
                }
                col
            })
            .collect();
        let sols = solve_exact(&a, &rhs)?;
        let mut block = RPoly::zero(2 * n_dim);
        for (b, sol) in y_monomials.iter().zip(&sols) {
            for (xi, c) in sol.iter().enumerate() {
                if !c.is_zero() {
                    block.insert_add(concat_exp(&cur.monomials[xi], b), c.clone());
                }
            }
        }
        blocks.push(block);
    }
    Ok(KernelTable::from_blocks(
        n_dim,
        max_degree,
        blocks,
        KernelMethod::LinearSolve,
    ))
}

/// Basis-sum construction: E_n = Σ_{|ν|=n} q_ν(x) q_ν(y) / r_ν.
pub fn build_kernel_blocks_basis_sum(
    basis: &OrthogonalBasis,
    max_degree: usize,
) -> Result<KernelTable> {
    if max_degree > basis.max_degree {
        return Err(DunklError::Range(format!(
            "basis degree {} below requested kernel degree {max_degree}",
            basis.max_degree
        )));
    }
    let n_dim = basis.ctx.dim();
    let mut blocks = Vec::with_capacity(max_degree + 1);
    for deg in 0..=max_degree {
        let data = basis.calc.degree(deg)?;
        let mut block = RPoly::zero(2 * n_dim);
        for item in basis.items_of_degree(deg)? {
            let inv_r = item.r.recip();
            for (ai, ca) in item.coords.iter().enumerate() {
                if ca.is_zero() {
                    continue;
                }
                for (bi, cb) in item.coords.iter().enumerate() {
                    if cb.is_zero() {
                        continue;
                    }
                    block.insert_add(
                        concat_exp(&data.monomials[ai], &data.monomials[bi]),
                        ca * cb * &inv_r,
                    );
                }
            }
        }
        blocks.push(block);
    }
    Ok(KernelTable::from_blocks(
        n_dim,
        max_degree,
        blocks,
        KernelMethod::BasisSum,
    ))
}

/// Build by linear solve and verify exact agreement with the basis sum.
pub fn build_checked(
    ctx: &DunklContext,
    basis: &OrthogonalBasis,
    max_degree: usize,
) -> Result<KernelTable> {
    let mut solved = build_kernel_blocks(ctx, max_degree)?;
    let summed = build_kernel_blocks_basis_sum(basis, max_degree)?;
    for n in 0..=max_degree {
        if solved.blocks[n] != summed.blocks[n] {
            return Err(DunklError::InternalConsistency(format!(
                "kernel constructions disagree at degree {n}"
            )));
        }
    }
    solved.cross_checked = true;
    Ok(solved)
}

impl KernelTable {
    /// A shallower view of the same table (for truncation-convergence runs).
    pub fn truncated(&self, degree: usize) -> Result<KernelTable> {
        if degree > self.degree {
            return Err(DunklError::Range(format!(
                "cannot extend table of degree {} to {degree}",
                self.degree
            )));
        }
        let mut t = KernelTable::from_blocks(
            self.nvars,
            degree,
            self.blocks[..=degree].to_vec(),
            self.method,
        );
        t.cross_checked = self.cross_checked;
        Ok(t)
    }

    /// Per-block values E_n(z, w) at complex points.
    pub fn block_values_c64(&self, z: &[Complex64], w: &[Complex64]) -> Vec<Complex64> {
        let point: Vec<Complex64> = z.iter().chain(w.iter()).copied().collect();
        self.blocks
            .iter()
            .map(|b| b.to_complex().eval(&point))
            .collect()
    }

    /// Per-block values with exact complex-rational arithmetic.
    pub fn block_values_crat(&self, z: &[CRat], w: &[CRat]) -> Vec<CRat> {
        let point: Vec<CRat> = z.iter().chain(w.iter()).cloned().collect();
        self.blocks.iter().map(|b| b.eval_crat(&point)).collect()
    }

    fn split_block(&self, n: usize, by_x: bool) -> Vec<(Exp, RPoly)> {
        let mut groups: std::collections::BTreeMap<Exp, RPoly> = std::collections::BTreeMap::new();
        for (e, c) in self.blocks[n].terms() {
            let xe: Exp = e[..self.nvars].iter().copied().collect();
            let ye: Exp = e[self.nvars..].iter().copied().collect();
            let (key, rest) = if by_x { (xe, ye) } else { (ye, xe) };
            groups
                .entry(key)
                .or_insert_with(|| RPoly::zero(self.nvars))
                .insert_add(rest, c.clone());
        }
        groups.into_iter().collect()
    }

    /// Split E_n by x-monomial: (x-exponent, y-polynomial in N vars) pairs.
    pub fn split_by_x(&self, n: usize) -> Result<&[(Exp, RPoly)]> {
        if n > self.degree {
            return Err(DunklError::Range(format!(
                "block {n} beyond degree {}",
                self.degree
            )));
        }
        let cache = self
            .split_x
            .get_or_init(|| (0..=self.degree).map(|m| self.split_block(m, true)).collect());
        Ok(&cache[n])
    }

    /// Split E_n by y-monomial: (y-exponent, x-polynomial in N vars) pairs.
    pub fn split_by_y(&self, n: usize) -> Result<&[(Exp, RPoly)]> {
        if n > self.degree {
            return Err(DunklError::Range(format!(
                "block {n} beyond degree {}",
                self.degree
            )));
        }
        let cache = self
            .split_y
            .get_or_init(|| (0..=self.degree).map(|m| self.split_block(m, false)).collect());
        Ok(&cache[n])
    }

    /// E_n with the x-block evaluated at a rational point: a polynomial in y.
    pub fn partial_eval_x(&self, n: usize, x: &[Rat]) -> Result<RPoly> {
        let groups = self.split_by_x(n)?;
        let mut out = RPoly::zero(self.nvars);
        for (xe, ypoly) in groups.iter() {
            let mut c = Rat::one();
            for (i, &k) in xe.iter().enumerate() {
                c *= rat_pow(&x[i], k as i64);
            }
            if !c.is_zero() {
                out.add_scaled_assign(ypoly, &c);
            }
        }
        Ok(out)
    }

    /// E_n with the y-block evaluated at a rational point: a polynomial in x.
    pub fn partial_eval_y(&self, n: usize, y: &[Rat]) -> Result<RPoly> {
        let groups = self.split_by_y(n)?;
        let mut out = RPoly::zero(self.nvars);
        for (ye, xpoly) in groups.iter() {
            let mut c = Rat::one();
            for (i, &k) in ye.iter().enumerate() {
                c *= rat_pow(&y[i], k as i64);
            }
            if !c.is_zero() {
                out.add_scaled_assign(xpoly, &c);
            }
        }
        Ok(out)
    }
}

/// Tail majorant Σ_{n>d} rⁿ/n!.
pub fn tail_estimate(d: usize, r: f64) -> f64 {
    let mut term = 1.0f64;
    for n in 1..=d {
        term *= r / n as f64;
    }
    // term = r^d/d!
    let mut total = 0.0;
    let mut n = d + 1;
    loop {
        term *= r / n as f64;
        total += term;
        if term < 1e-300 || term < total * 1e-18 || n > d + 10_000 {
            break;
        }
        n += 1;
    }
    total
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn bilinear_sq(v: &[Complex64]) -> Complex64 {
    v.iter().map(|c| c * c).sum()
}

/// Σ_{n≤D} E_n(z,w) with the tail estimate; refuses when the tail exceeds
/// the requested tolerance instead of silently degrading.
pub fn eval_dunkl_kernel(
    table: &KernelTable,
    z: &[Complex64],
    w: &[Complex64],
    tol: Option<f64>,
) -> Result<KernelEval> {
    eval_kernel_scaled(table, z, w, &Rat::one(), tol)
}

/// Σ_{n≤D} t^{-n} E_n(z,w) = truncated E(z/√t, w/√t).
pub fn eval_kernel_scaled(
    table: &KernelTable,
    z: &[Complex64],
    w: &[Complex64],
    t: &Rat,
    tol: Option<f64>,
) -> Result<KernelEval> {
    if !t.is_positive() {
        return Err(DunklError::InvalidParameter("t must be > 0".into()));
    }
    let tf = rat_to_f64(t);
    let values = table.block_values_c64(z, w);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut weight = 1.0f64;
    for (n, v) in values.iter().enumerate() {
        if n > 0 {
            weight /= tf;
        }
        sum += v * weight;
    }
    let r = norm2(z) * norm2(w) / tf;
    let tail = tail_estimate(table.degree, r);
    if let Some(tolerance) = tol {
        if tail > tolerance {
            return Err(DunklError::PrecisionFailure {
                achieved: tail,
                requested: tolerance,
                partial: Some((sum.re, sum.im)),
            });
        }
    }
    Ok(KernelEval {
        value: sum,
        truncation_degree: table.degree,
        tail_estimate: tail,
    })
}

/// ρ_{μ,t}(z,q) = e^{-(z²+q²)/2t} E(z/√t, q/√t).
pub fn heat_kernel(
    table: &KernelTable,
    t: &Rat,
    z: &[Complex64],
    q: &[Complex64],
    tol: Option<f64>,
) -> Result<Complex64> {
    let tf = rat_to_f64(t);
    let series = eval_kernel_scaled(table, z, q, t, scale_tol(tol, t, z, q))?;
    let env = (-(bilinear_sq(z) + bilinear_sq(q)) / (2.0 * tf)).exp();
    Ok(env * series.value)
}

/// σ_{μ,t}(q) = ρ_{μ,t}(0,q) = e^{-q²/2t} (independent of μ).
pub fn heat_kernel_one_variable(t: &Rat, q: &[Complex64]) -> Complex64 {
    (-bilinear_sq(q) / (2.0 * rat_to_f64(t))).exp()
}

fn scale_tol(tol: Option<f64>, t: &Rat, z: &[Complex64], q: &[Complex64]) -> Option<f64> {
    // interpret the requested tolerance on the final kernel value: the
    // envelope multiplies the series, so the series may tolerate tol/|env|
    tol.map(|tolerance| {
        let tf = rat_to_f64(t);
        let env = (-(bilinear_sq(z) + bilinear_sq(q)) / (2.0 * tf)).exp().norm();
        if env > 0.0 {
            tolerance / env
        } else {
            f64::INFINITY
        }
    })
}

/// The four coherent-state kernels, each computed by its own formula path.
pub fn sb_kernel(
    table: &KernelTable,
    version: SbVersion,
    t: &Rat,
    z: &[Complex64],
    q: &[Complex64],
    bso: Option<&BsoParams>,
    tol: Option<f64>,
) -> Result<Complex64> {
    let tf = rat_to_f64(t);
    match version {
        SbVersion::A => {
            let series = eval_kernel_scaled(table, z, q, t, tol)?;
            let env = (-bilinear_sq(z) / (2.0 * tf) - bilinear_sq(q) / (4.0 * tf)).exp();
            Ok(env * series.value)
        }
        SbVersion::B => {
            let num = heat_kernel(table, t, z, q, tol)?;
            let zero = vec![Complex64::new(0.0, 0.0); z.len()];
            let den = heat_kernel(table, t, &zero, q, tol)?;
            Ok(num / den)
        }
        SbVersion::C => heat_kernel(table, t, z, q, tol),
        SbVersion::Bso => {
            let params = bso.ok_or_else(|| {
                DunklError::InvalidParameter("BSO kernel needs measure exponent and c_mu".into())
            })?;
            // fixed t = 1 semantics: 2^{γ+N/2} c_μ^{-1/2} e^{-z²/2-y²} E(√2 y, √2 z)
            let sqrt2 = Complex64::new(2f64.sqrt(), 0.0);
            let y2: Vec<Complex64> = q.iter().map(|c| c * sqrt2).collect();
            let z2: Vec<Complex64> = z.iter().map(|c| c * sqrt2).collect();
            let series = eval_dunkl_kernel(table, &y2, &z2, tol)?;
            let env = (-bilinear_sq(z) / 2.0 - bilinear_sq(q)).exp();
            let scale = 2f64.powf(rat_to_f64(&params.measure_exponent)) / params.c_mu.sqrt();
            Ok(scale * env * series.value)
        }
    }
}

/// 𝕂_{μ,t}(z,w) = E(z*/√t, w/√t) with componentwise conjugation.
pub fn reproducing_kernel(
    table: &KernelTable,
    t: &Rat,
    z: &[Complex64],
    w: &[Complex64],
    tol: Option<f64>,
) -> Result<Complex64> {
    let z_conj: Vec<Complex64> = z.iter().map(|c| c.conj()).collect();
    Ok(eval_kernel_scaled(table, &z_conj, w, t, tol)?.value)
}

/// Rank-one (Z₂) coefficient recursion: c_0 = 1,
/// c_n = c_{n−1} / (n + μ(1 − (−1)ⁿ)); E(z,w) = Σ c_n (zw)ⁿ.
pub fn z2_kernel_coefficients(mu: &Rat, max_degree: usize) -> Vec<Rat> {
    let mut coeffs = Vec::with_capacity(max_degree + 1);
    coeffs.push(Rat::one());
    for n in 1..=max_degree {
        let reflection_term = if n % 2 == 1 {
            mu * Rat::from(num::BigInt::from(2))
        } else {
            Rat::zero()
        };
        let denom = Rat::from(num::BigInt::from(n)) + reflection_term;
        let prev: &Rat = coeffs.last().unwrap();
        coeffs.push(prev / denom);
    }
    coeffs
}

/// Evaluate the rank-one recursion series at zw, truncated at `max_degree`.
pub fn z2_kernel_eval(mu: &Rat, zw: Complex64, max_degree: usize) -> Complex64 {
    let coeffs = z2_kernel_coefficients(mu, max_degree);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    for c in coeffs {
        sum += power * rat_to_f64(&c);
        power *= zw;
    }
    sum
}

/// T^x_{e_i} applied to a kernel block (for the recursion integrity check).
pub fn block_dunkl_x(ctx: &DunklContext, table: &KernelTable, n: usize, i: usize) -> Result<RPoly> {
    let block = table
        .blocks
        .get(n)
        .ok_or_else(|| DunklError::Range(format!("block {n} not built")))?;
    let mut xi = vec![Rat::zero(); ctx.dim()];
    xi[i] = Rat::one();
    dunkl_apply_block(ctx, 0, &xi, block)
}

/// y_i · E_{n−1}, the right side of the block recursion.
pub fn block_recursion_rhs(table: &KernelTable, n: usize, i: usize) -> Result<RPoly> {
    if n == 0 {
        return Ok(RPoly::zero(2 * table.nvars));
    }
    let prev = &table.blocks[n - 1];
    let mut out = RPoly::zero(2 * table.nvars);
    for (e, c) in prev.terms() {
        let mut e2 = e.clone();
        e2[table.nvars + i] += 1;
        out.insert_add(e2, c.clone());
    }
    Ok(out)
}

/// Swap the x- and y-blocks of a block polynomial (symmetry check).
pub fn block_swapped(table: &KernelTable, n: usize) -> Result<RPoly> {
    let block = table
        .blocks
        .get(n)
        .ok_or_else(|| DunklError::Range(format!("block {n} not built")))?;
    let nv = table.nvars;
    let mut out = RPoly::zero(2 * nv);
    for (e, c) in block.terms() {
        let mut e2 = exp_zero(2 * nv);
        for i in 0..nv {
            e2[i] = e[nv + i];
            e2[nv + i] = e[i];
        }
        out.insert_add(e2, c.clone());
    }
    Ok(out)
}

/// E_n(gx, gy) for a group element's rational matrix.
pub fn block_group_action(table: &KernelTable, n: usize, matrix: &[Vec<Rat>]) -> Result<RPoly> {
    let block = table
        .blocks
        .get(n)
        .ok_or_else(|| DunklError::Range(format!("block {n} not built")))?;
    let nv = table.nvars;
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(2 * nv);
    for i in 0..2 * nv {
        let mut row = vec![Rat::zero(); 2 * nv];
        let (bi, off) = if i < nv { (i, 0) } else { (i - nv, nv) };
        for j in 0..nv {
            row[off + j] = matrix[bi][j].clone();
        }
        rows.push(row);
    }
    Ok(block.compose_linear(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coxeter::{
        build_root_system, generate_group, make_multiplicity, orbit_partition, RootSystemSpec,
    };
    use crate::hermite::DegreeOrder;
    use crate::scalar::{parse_rational, rat, rat_int};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::sync::Arc;

    fn ctx(family: &str, n: usize, mu: &[&str]) -> Arc<DunklContext> {
        let spec = RootSystemSpec {
            family: family.into(),
            n,
            m: None,
            roots: None,
            mu: vec![],
        };
        let rs = build_root_system(&spec).unwrap();
        let g = generate_group(&rs).unwrap();
        let orbits = orbit_partition(&rs, &g).unwrap();
        let values: Vec<Rat> = mu.iter().map(|s| parse_rational(s).unwrap()).collect();
        let m = make_multiplicity(&orbits, rs.n_roots(), &values).unwrap();
        Arc::new(DunklContext::new(rs, g, m).unwrap())
    }

    #[test]
    fn trivial_multiplicity_blocks_are_exponential_series() {
        let c = ctx("B", 2, &["0", "0"]);
        let table = build_kernel_blocks(&c, 5).unwrap();
        // ⟨x,y⟩ = x₁y₁ + x₂y₂ in 2N = 4 vars
        let mut inner = RPoly::zero(4);
        for i in 0..2 {
            let mut e = exp_zero(4);
            e[i] = 1;
            e[2 + i] = 1;
            inner.insert_add(e, Rat::one());
        }
        let mut power = RPoly::one(4);
        let mut factorial = Rat::one();
        for n in 0..=5usize {
            if n > 0 {
                power = power.mul(&inner);
                factorial *= rat(n as i64, 1);
            }
            assert_eq!(table.blocks[n], power.scale(&factorial.recip()), "n={n}");
        }
    }

    #[test]
    fn constructions_agree_and_recursion_holds() {
        let c = ctx("B", 2, &["1/2", "3/2"]);
        let basis = Arc::new(
            crate::hermite::OrthogonalBasis::build(c.clone(), 8, DegreeOrder::GradedLex).unwrap(),
        );
        let table = build_checked(&c, &basis, 8).unwrap();
        assert!(table.cross_checked);
        assert_eq!(table.blocks[0], RPoly::one(4));
        for n in 1..=8usize {
            for i in 0..2 {
                let lhs = block_dunkl_x(&c, &table, n, i).unwrap();
                let rhs = block_recursion_rhs(&table, n, i).unwrap();
                assert_eq!(lhs, rhs, "recursion fails at n={n} i={i}");
            }
            assert_eq!(table.blocks[n], block_swapped(&table, n).unwrap(), "symmetry at {n}");
        }
        // G-invariance as exact polynomial identity
        for e in &c.group.elements {
            let m = e.matrix_rat.as_ref().unwrap();
            for n in 0..=4usize {
                assert_eq!(block_group_action(&table, n, m).unwrap(), table.blocks[n]);
            }
        }
    }

    #[test]
    fn basis_order_does_not_change_blocks() {
        let c = ctx("B", 2, &["1/2", "3/2"]);
        let lex = Arc::new(
            crate::hermite::OrthogonalBasis::build(c.clone(), 6, DegreeOrder::GradedLex).unwrap(),
        );
        let rev = Arc::new(
            crate::hermite::OrthogonalBasis::build(c.clone(), 6, DegreeOrder::GradedRevLex)
                .unwrap(),
        );
        let a = build_kernel_blocks_basis_sum(&lex, 6).unwrap();
        let b = build_kernel_blocks_basis_sum(&rev, 6).unwrap();
        for n in 0..=6usize {
            assert_eq!(a.blocks[n], b.blocks[n], "order dependence at degree {n}");
        }
    }

    #[test]
    fn z2_recursion_oracle_matches_exactly() {
        let mu = rat(1, 1);
        let c = ctx("A1^N", 1, &["1"]);
        let table = build_kernel_blocks(&c, 40).unwrap();
        let coeffs = z2_kernel_coefficients(&mu, 40);
        for n in 0..=40usize {
            // block must be c_n xⁿyⁿ
            let mut e = exp_zero(2);
            e[0] = n as u16;
            e[1] = n as u16;
            let expected = RPoly::monomial(2, e, coeffs[n].clone());
            assert_eq!(table.blocks[n], expected, "coefficient mismatch at {n}");
        }
        // pointwise agreement of the two evaluation routes on |zw| ≤ 4
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let x = rng.gen_range(-2.0..2.0);
            let y = rng.gen_range(-2.0..2.0);
            let z = [Complex64::new(x, y)];
            let w = [Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))];
            let via_blocks = eval_dunkl_kernel(&table, &z, &w, None).unwrap().value;
            let via_recursion = z2_kernel_eval(&mu, z[0] * w[0], 40);
            let denom = via_recursion.norm().max(1e-30);
            assert!(
                (via_blocks - via_recursion).norm() / denom < 1e-12,
                "z={z:?} w={w:?}"
            );
        }
        // E(1,1) ≈ 1.543081 for μ = 1
        let v = z2_kernel_eval(&mu, Complex64::new(1.0, 0.0), 40);
        assert!((v.re - 1.5430806).abs() < 1e-6, "E(1,1) = {v}");
    }

    #[test]
    fn kernel_bound_and_basic_values() {
        let c = ctx("A1^N", 2, &["1", "2"]);
        let basis = Arc::new(
            crate::hermite::OrthogonalBasis::build(c.clone(), 12, DegreeOrder::GradedLex).unwrap(),
        );
        let table = build_kernel_blocks_basis_sum(&basis, 12).unwrap();
        // E(0, w) = 1
        let zero = [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        let w = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4)];
        let e0 = eval_dunkl_kernel(&table, &zero, &w, None).unwrap();
        assert!((e0.value - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        // |E(z,w)| ≤ e^{|z||w|} + tail on random samples in the unit bidisk
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let mut sample = || {
                [
                    Complex64::new(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7)),
                    Complex64::new(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7)),
                ]
            };
            let z = sample();
            let w = sample();
            let ev = eval_dunkl_kernel(&table, &z, &w, None).unwrap();
            let r = super::norm2(&z) * super::norm2(&w);
            assert!(ev.value.norm() <= r.exp() + ev.tail_estimate + 1e-12);
        }
    }

    #[test]
    fn precision_failure_path() {
        let c = ctx("A1^N", 1, &["1"]);
        let table = build_kernel_blocks(&c, 6).unwrap();
        let z = [Complex64::new(3.0, 0.0)];
        let w = [Complex64::new(3.0, 0.0)];
        let err = eval_dunkl_kernel(&table, &z, &w, Some(1e-10)).unwrap_err();
        match err {
            DunklError::PrecisionFailure { achieved, partial, .. } => {
                assert!(achieved > 1e-10);
                assert!(partial.is_some());
            }
            other => panic!("expected precision failure, got {other}"),
        }
    }

    #[test]
    fn heat_kernel_values() {
        let c = ctx("A1^N", 1, &["0"]);
        let table = build_kernel_blocks(&c, 30).unwrap();
        let t = rat(1, 2);
        // μ≡0: ρ(x,q) = e^{-(x-q)²/2t} on real samples
        for (x, q) in [(0.3, -0.4), (1.0, 0.5), (-0.7, -0.2)] {
            let v = heat_kernel(
                &table,
                &t,
                &[Complex64::new(x, 0.0)],
                &[Complex64::new(q, 0.0)],
                None,
            )
            .unwrap();
            let expected = (-(x - q) * (x - q) / (2.0 * 0.5)).exp();
            assert!((v.re - expected).abs() < 1e-12, "x={x} q={q}");
        }
        // ρ(0,q) = e^{-q²/2t}
        let c1 = ctx("A1^N", 1, &["1"]);
        let table1 = build_kernel_blocks(&c1, 24).unwrap();
        let q = [Complex64::new(0.8, 0.0)];
        let v = heat_kernel(&table1, &t, &[Complex64::new(0.0, 0.0)], &q, None).unwrap();
        let sigma = heat_kernel_one_variable(&t, &q);
        assert!((v - sigma).norm() < 1e-14);
        // symmetry ρ(x,q) = ρ(q,x)
        let x = [Complex64::new(0.5, 0.0)];
        let a = heat_kernel(&table1, &t, &x, &q, None).unwrap();
        let b = heat_kernel(&table1, &t, &q, &x, None).unwrap();
        assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn sb_kernel_values() {
        let c = ctx("A1^N", 1, &["0"]);
        let table = build_kernel_blocks(&c, 30).unwrap();
        let t = Rat::one();
        let z = [Complex64::new(0.4, 0.3)];
        let q = [Complex64::new(-0.6, 0.0)];
        let zero = [Complex64::new(0.0, 0.0)];
        // A(z,0) = e^{-z²/2t}, A(0,q) = e^{-q²/4t}
        let az0 = sb_kernel(&table, SbVersion::A, &t, &z, &zero, None, None).unwrap();
        assert!((az0 - (-bilinear_sq(&z) / 2.0).exp()).norm() < 1e-14);
        let a0q = sb_kernel(&table, SbVersion::A, &t, &zero, &q, None, None).unwrap();
        assert!((a0q - (-bilinear_sq(&q) / 4.0).exp()).norm() < 1e-14);
        // μ≡0: A(z,q) = e^{-z²/2t - q²/4t + zq/t}
        let a = sb_kernel(&table, SbVersion::A, &t, &z, &q, None, None).unwrap();
        let classical = (-bilinear_sq(&z) / 2.0 - bilinear_sq(&q) / 4.0 + z[0] * q[0]).exp();
        assert!((a - classical).norm() < 1e-13);
        // version C relations at a nontrivial multiplicity
        let c1 = ctx("A1^N", 1, &["1"]);
        let table1 = build_kernel_blocks(&c1, 30).unwrap();
        let t = rat_int(2);
        let cv = sb_kernel(&table1, SbVersion::C, &t, &z, &q, None, None).unwrap();
        let a0 = sb_kernel(&table1, SbVersion::A, &t, &zero, &q, None, None).unwrap();
        let azq = sb_kernel(&table1, SbVersion::A, &t, &z, &q, None, None).unwrap();
        assert!((cv - a0 * azq).norm() < 1e-13);
        let z_half: Vec<Complex64> = z.iter().map(|c| c / 2.0).collect();
        let a2t0 = sb_kernel(&table1, SbVersion::A, &rat_int(4), &z, &zero, None, None).unwrap();
        let at2 = sb_kernel(&table1, SbVersion::A, &rat(1, 1), &z_half, &q, None, None).unwrap();
        assert!((cv - a2t0 * at2).norm() < 1e-13);
    }

    #[test]
    fn reproducing_kernel_properties() {
        let c = ctx("A1^N", 1, &["1/2"]);
        let table = build_kernel_blocks(&c, 24).unwrap();
        let t = Rat::one();
        // 𝕂(0, w) = 1
        let w = [Complex64::new(0.3, -0.2)];
        let k0 = reproducing_kernel(&table, &t, &[Complex64::new(0.0, 0.0)], &w, None).unwrap();
        assert!((k0 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        // Hermitian symmetry 𝕂(z,w) = 𝕂(w,z)*
        let z = [Complex64::new(-0.5, 0.7)];
        let a = reproducing_kernel(&table, &t, &z, &w, None).unwrap();
        let b = reproducing_kernel(&table, &t, &w, &z, None).unwrap();
        assert!((a - b.conj()).norm() < 1e-13);
    }

    #[test]
    fn truncated_view() {
        let c = ctx("A1^N", 1, &["1"]);
        let table = build_kernel_blocks(&c, 10).unwrap();
        let t8 = table.truncated(8).unwrap();
        assert_eq!(t8.degree, 8);
        assert_eq!(t8.blocks.len(), 9);
        assert!(table.truncated(11).is_err());
    }
}
