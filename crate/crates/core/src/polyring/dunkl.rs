//! Dunkl operators, Dunkl Laplacian, heat semigroup, dilations, the Fischer
//! pairing, and the exact Gaussian-moment functional.
//!
//! The operator T_ξ = ∂_ξ + ½ Σ_{α∈𝓡} μ(α) ⟨α,ξ⟩/⟨α,x⟩ (1 − σ_α) is computed
//! with the sum over the whole root set (order-free form), and the difference
//! quotient is an exact polynomial division: (p − p∘σ_α) vanishes on the
//! reflecting hyperplane, so ⟨α,x⟩ divides it with zero remainder. A nonzero
//! remainder can only mean broken reflection data and is treated as an
//! internal error.

use super::{exp_total, exp_zero, Coeff, Exp, Poly, RPoly};
use crate::coxeter::{MultiplicityFunction, ReflectionGroup, RootSystem};
use crate::error::{DunklError, Result};
use crate::scalar::{rat, rat_pow, rat_to_f64, PowScale, Rat};
use num::complex::Complex64;
use num::{One, Signed, Zero};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Per-root data for one coefficient field: multiplicity, direction (the
/// scale cancels in every Dunkl quotient), and the reflection matrix.
#[derive(Clone, Debug)]
pub struct RootData<C: Coeff> {
    pub mu: Rat,
    pub dir: Vec<C>,
    pub refl: Vec<Vec<C>>,
}

/// Root system + group + multiplicity with cached per-root operator data.
pub struct DunklContext {
    pub system: RootSystem,
    pub group: ReflectionGroup,
    pub mu: MultiplicityFunction,
    roots_rat: OnceLock<Option<Arc<Vec<RootData<Rat>>>>>,
    roots_c64: OnceLock<Arc<Vec<RootData<Complex64>>>>,
    moment_rat: Mutex<HashMap<Rat, Arc<Mutex<HashMap<Exp, Rat>>>>>,
    moment_c64: Mutex<HashMap<Rat, Arc<Mutex<HashMap<Exp, Complex64>>>>>,
}

impl std::fmt::Debug for DunklContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DunklContext")
            .field("dim", &self.system.dim)
            .field("roots", &self.system.n_roots())
            .field("group_order", &self.group.order())
            .field("mu", &self.mu.orbit_values)
            .finish()
    }
}

impl DunklContext {
    pub fn new(
        system: RootSystem,
        group: ReflectionGroup,
        mu: MultiplicityFunction,
    ) -> Result<Self> {
        if mu.orbit_of_root.len() != system.n_roots() {
            return Err(DunklError::Config(
                "multiplicity table does not match the root list".into(),
            ));
        }
        Ok(DunklContext {
            system,
            group,
            mu,
            roots_rat: OnceLock::new(),
            roots_c64: OnceLock::new(),
            moment_rat: Mutex::new(HashMap::new()),
            moment_c64: Mutex::new(HashMap::new()),
        })
    }

    pub fn dim(&self) -> usize {
        self.system.dim
    }

    pub fn is_exact(&self) -> bool {
        self.system.is_exact()
    }

    pub fn gamma(&self) -> &Rat {
        &self.mu.gamma
    }

    /// γ_μ + N/2, the homogeneity exponent of the normalized measure.
    pub fn measure_exponent(&self) -> Rat {
        self.gamma() + rat(self.dim() as i64, 2)
    }

    /// Same geometry with μ ≡ 0 (trivial Dunkl structure).
    pub fn with_zero_multiplicity(&self) -> Result<DunklContext> {
        DunklContext::new(
            self.system.clone(),
            self.group.clone(),
            self.mu.zero_like(),
        )
    }

    fn root_data_rat(&self) -> Result<Arc<Vec<RootData<Rat>>>> {
        let slot = self.roots_rat.get_or_init(|| {
            if !self.system.is_exact() {
                return None;
            }
            let data = self
                .system
                .roots
                .iter()
                .enumerate()
                .map(|(i, root)| {
                    let dir = root.dir_rat.clone().unwrap();
                    let refl = crate::coxeter::reflection_matrix_rat(&dir);
                    RootData {
                        mu: self.mu.mu_of_root(i).clone(),
                        dir,
                        refl,
                    }
                })
                .collect();
            Some(Arc::new(data))
        });
        slot.clone().ok_or_else(|| {
            DunklError::FloatingRegime("rational operator data unavailable".into())
        })
    }

    fn root_data_c64(&self) -> Arc<Vec<RootData<Complex64>>> {
        self.roots_c64
            .get_or_init(|| {
                let data = self
                    .system
                    .roots
                    .iter()
                    .enumerate()
                    .map(|(i, root)| {
                        let dir: Vec<Complex64> = root
                            .dir_f64
                            .iter()
                            .map(|&c| Complex64::new(c, 0.0))
                            .collect();
                        let refl_f = crate::coxeter::reflection_matrix_f64(&root.dir_f64);
                        let refl = refl_f
                            .iter()
                            .map(|row| row.iter().map(|&c| Complex64::new(c, 0.0)).collect())
                            .collect();
                        RootData {
                            mu: self.mu.mu_of_root(i).clone(),
                            dir,
                            refl,
                        }
                    })
                    .collect();
                Arc::new(data)
            })
            .clone()
    }
}

/// Coefficient fields that can pull operator data out of a context.
pub trait CtxCoeff: Coeff {
    fn root_data(ctx: &DunklContext) -> Result<Arc<Vec<RootData<Self>>>>;
    fn monomial_moment(ctx: &DunklContext, s: &Rat, e: &Exp) -> Result<Self>;
    /// Positive real part when the value is a positive real number.
    fn as_positive_real(&self) -> Option<f64>;
}

impl CtxCoeff for Rat {
    fn root_data(ctx: &DunklContext) -> Result<Arc<Vec<RootData<Rat>>>> {
        ctx.root_data_rat()
    }
    fn monomial_moment(ctx: &DunklContext, s: &Rat, e: &Exp) -> Result<Rat> {
        monomial_moment_rat(ctx, s, e)
    }
    fn as_positive_real(&self) -> Option<f64> {
        if self.is_positive() {
            Some(rat_to_f64(self))
        } else {
            None
        }
    }
}

impl CtxCoeff for Complex64 {
    fn root_data(ctx: &DunklContext) -> Result<Arc<Vec<RootData<Complex64>>>> {
        Ok(ctx.root_data_c64())
    }
    fn monomial_moment(ctx: &DunklContext, s: &Rat, e: &Exp) -> Result<Complex64> {
        if ctx.is_exact() {
            Ok(Complex64::from_rat(&monomial_moment_rat(ctx, s, e)?))
        } else {
            monomial_moment_c64(ctx, s, e)
        }
    }
    fn as_positive_real(&self) -> Option<f64> {
        if self.im == 0.0 && self.re > 0.0 {
            Some(self.re)
        } else {
            None
        }
    }
}

fn dot<C: Coeff>(a: &[C], b: &[C]) -> C {
    let mut acc = C::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc.add_ref(&x.mul_ref(y));
    }
    acc
}

/// Shared body of the Dunkl operator: works on any variable layout as long
/// as `xi`, directions and reflections are given in full-width coordinates.
fn dunkl_core<C: Coeff>(
    p: &Poly<C>,
    xi: &[C],
    roots: &[(Rat, Vec<C>, Vec<Vec<C>>)],
) -> Result<Poly<C>> {
    let mut out = p.directional_derivative(xi);
    let half = C::from_rat(&rat(1, 2));
    let input_scale = p.max_coeff_magnitude().max(1.0);
    for (mu, dir, refl) in roots {
        if mu.is_zero() {
            continue;
        }
        let pairing = dot(dir, xi);
        if pairing.is_zero() {
            continue;
        }
        let reflected = p.compose_linear(refl);
        let diff = p.sub(&reflected);
        if diff.is_zero() {
            continue;
        }
        let (quot, rem) = diff.divide_linear(dir)?;
        let rem_ok = if C::EXACT {
            rem.is_zero()
        } else {
            rem.max_coeff_magnitude() <= 1e-9 * input_scale
        };
        if !rem_ok {
            return Err(DunklError::InternalConsistency(
                "difference quotient left a nonzero remainder".into(),
            ));
        }
        let scale = half.mul_ref(&C::from_rat(mu)).mul_ref(&pairing);
        out.add_scaled_assign(&quot, &scale);
    }
    Ok(out)
}

/// T_{ξ,μ} p.
pub fn dunkl_apply<C: CtxCoeff>(ctx: &DunklContext, xi: &[C], p: &Poly<C>) -> Result<Poly<C>> {
    if xi.len() != ctx.dim() || p.nvars() != ctx.dim() {
        return Err(DunklError::InvalidParameter(
            "dimension mismatch in dunkl_apply".into(),
        ));
    }
    let data = C::root_data(ctx)?;
    let roots: Vec<(Rat, Vec<C>, Vec<Vec<C>>)> = data
        .iter()
        .map(|r| (r.mu.clone(), r.dir.clone(), r.refl.clone()))
        .collect();
    dunkl_core(p, xi, &roots)
}

/// T_{ξ,μ} acting on one N-variable block of a wider polynomial (the other
/// blocks are inert scalars). Block b covers variables b·N .. (b+1)·N.
pub fn dunkl_apply_block<C: CtxCoeff>(
    ctx: &DunklContext,
    block: usize,
    xi: &[C],
    p: &Poly<C>,
) -> Result<Poly<C>> {
    let n = ctx.dim();
    let total = p.nvars();
    let offset = block * n;
    if offset + n > total {
        return Err(DunklError::InvalidParameter("block out of range".into()));
    }
    let embed_vec = |v: &[C]| -> Vec<C> {
        let mut full = vec![C::zero(); total];
        full[offset..offset + n].clone_from_slice(v);
        full
    };
    let embed_mat = |m: &[Vec<C>]| -> Vec<Vec<C>> {
        let mut full: Vec<Vec<C>> = (0..total)
            .map(|i| {
                (0..total)
                    .map(|j| if i == j { C::one() } else { C::zero() })
                    .collect()
            })
            .collect();
        for i in 0..n {
            for j in 0..n {
                full[offset + i][offset + j] = m[i][j].clone();
            }
        }
        full
    };
    let data = C::root_data(ctx)?;
    let roots: Vec<(Rat, Vec<C>, Vec<Vec<C>>)> = data
        .iter()
        .map(|r| (r.mu.clone(), embed_vec(&r.dir), embed_mat(&r.refl)))
        .collect();
    dunkl_core(p, &embed_vec(xi), &roots)
}

/// Δ_μ = Σ_j T_{e_j}² over the standard basis.
pub fn dunkl_laplacian<C: CtxCoeff>(ctx: &DunklContext, p: &Poly<C>) -> Result<Poly<C>> {
    let n = ctx.dim();
    let mut acc = Poly::zero(n);
    for j in 0..n {
        let mut xi = vec![C::zero(); n];
        xi[j] = C::one();
        let once = dunkl_apply(ctx, &xi, p)?;
        let twice = dunkl_apply(ctx, &xi, &once)?;
        acc.add_scaled_assign(&twice, &C::one());
    }
    Ok(acc)
}

/// Δ_μ computed in an arbitrary orthonormal frame (the result must not
/// depend on the frame; tests verify this).
pub fn dunkl_laplacian_frame<C: CtxCoeff>(
    ctx: &DunklContext,
    frame: &[Vec<C>],
    p: &Poly<C>,
) -> Result<Poly<C>> {
    let n = ctx.dim();
    let mut acc = Poly::zero(n);
    for xi in frame {
        let once = dunkl_apply(ctx, xi, p)?;
        let twice = dunkl_apply(ctx, xi, &once)?;
        acc.add_scaled_assign(&twice, &C::one());
    }
    Ok(acc)
}

/// e^{τΔ_μ/2} p = Σ_k (1/k!) (τ/2)^k Δ_μ^k p; the sum stops at ⌊deg p/2⌋
/// because Δ_μ lowers degree by two and kills degrees ≤ 1.
pub fn heat_apply<C: CtxCoeff>(ctx: &DunklContext, tau: &Rat, p: &Poly<C>) -> Result<Poly<C>> {
    let kmax = p.degree() / 2;
    let mut acc = p.clone();
    let mut power = p.clone();
    let mut factor = Rat::one();
    for k in 1..=kmax {
        power = dunkl_laplacian(ctx, &power)?;
        if power.is_zero() {
            break;
        }
        factor = factor * tau / rat((2 * k) as i64, 1);
        acc.add_scaled_assign(&power, &C::from_rat(&factor));
    }
    Ok(acc)
}

/// Coefficient action κ ↦ λ^{|κ|} (both δ_λ on ℝ^N and D_λ on ℂ^N).
pub fn dilate<C: CtxCoeff>(lambda: &C, p: &Poly<C>) -> Result<Poly<C>> {
    if lambda.as_positive_real().is_none() {
        return Err(DunklError::InvalidParameter(
            "dilation parameter must be a positive real".into(),
        ));
    }
    let mut out = Poly::zero(p.nvars());
    for (e, c) in p.terms() {
        let mut f = C::one();
        for _ in 0..exp_total(e) {
            f = f.mul_ref(lambda);
        }
        out.insert_add(e.clone(), c.mul_ref(&f));
    }
    Ok(out)
}

/// Exact dilation by λ = √s with s rational: returns (a, b) with
/// δ_λ p = a + √s · b, splitting by exponent parity.
pub fn dilate_sqrt_exact(s: &Rat, p: &RPoly) -> Result<(RPoly, RPoly)> {
    if !s.is_positive() {
        return Err(DunklError::InvalidParameter(
            "dilation parameter squared must be positive".into(),
        ));
    }
    let mut even = RPoly::zero(p.nvars());
    let mut odd = RPoly::zero(p.nvars());
    for (e, c) in p.terms() {
        let d = exp_total(e);
        let half = rat_pow(s, (d / 2) as i64);
        if d % 2 == 0 {
            even.insert_add(e.clone(), c * &half);
        } else {
            odd.insert_add(e.clone(), c * &half);
        }
    }
    Ok((even, odd))
}

/// [p,q]_{μ,t} = ((δ_{√t} p)(T_μ)(δ_{√t} q))(0), computed per homogeneous
/// degree: cross degrees vanish, and degree-d ↔ degree-d pairs pick up t^d.
pub fn fischer_pair<C: CtxCoeff>(
    ctx: &DunklContext,
    p: &Poly<C>,
    q: &Poly<C>,
    t: &Rat,
) -> Result<C> {
    if !t.is_positive() {
        return Err(DunklError::InvalidParameter("t must be > 0".into()));
    }
    let pp = p.homogeneous_parts();
    let qp = q.homogeneous_parts();
    let mut total = C::zero();
    for (d, pd) in &pp {
        let Some(qd) = qp.get(d) else { continue };
        // iterated Dunkl applications T^κ q_d, memoized over prefixes
        let mut cache: HashMap<Exp, Poly<C>> = HashMap::new();
        cache.insert(exp_zero(ctx.dim()), qd.clone());
        let mut deg_sum = C::zero();
        for (e, c) in pd.terms() {
            let applied = apply_iterated(ctx, e, &mut cache)?;
            deg_sum = deg_sum.add_ref(&c.mul_ref(&applied.constant_term()));
        }
        let t_pow = C::from_rat(&rat_pow(t, *d as i64));
        total = total.add_ref(&deg_sum.mul_ref(&t_pow));
    }
    Ok(total)
}

fn apply_iterated<C: CtxCoeff>(
    ctx: &DunklContext,
    kappa: &Exp,
    cache: &mut HashMap<Exp, Poly<C>>,
) -> Result<Poly<C>> {
    if let Some(p) = cache.get(kappa) {
        return Ok(p.clone());
    }
    let i = kappa
        .iter()
        .position(|&k| k > 0)
        .expect("nonzero multi-index");
    let mut prev = kappa.clone();
    prev[i] -= 1;
    let base = apply_iterated(ctx, &prev, cache)?;
    let mut xi = vec![C::zero(); ctx.dim()];
    xi[i] = C::one();
    let next = dunkl_apply(ctx, &xi, &base)?;
    cache.insert(kappa.clone(), next.clone());
    Ok(next)
}

/// Monomial moments ∫ x^e dm_{μ,s} by the ladder
/// ∫ x_i·g dm_s = s·∫ (T_i g) dm_s, memoized per (s, e) on the context.
fn monomial_moment_rat(ctx: &DunklContext, s: &Rat, e: &Exp) -> Result<Rat> {
    let memo = {
        let mut map = ctx.moment_rat.lock().unwrap();
        map.entry(s.clone())
            .or_insert_with(|| Arc::new(Mutex::new(HashMap::new())))
            .clone()
    };
    fn go(
        ctx: &DunklContext,
        s: &Rat,
        e: &Exp,
        memo: &Mutex<HashMap<Exp, Rat>>,
    ) -> Result<Rat> {
        if exp_total(e) == 0 {
            return Ok(Rat::one());
        }
        if exp_total(e) % 2 == 1 {
            // odd total degree: the measure is symmetric under x ↦ −x
            // (the weight is even since roots come in ± pairs)
            return Ok(Rat::zero());
        }
        if let Some(v) = memo.lock().unwrap().get(e) {
            return Ok(v.clone());
        }
        let i = e.iter().position(|&k| k > 0).unwrap();
        let mut rest = e.clone();
        rest[i] -= 1;
        let g = RPoly::monomial(ctx.dim(), rest, Rat::one());
        let mut xi = vec![Rat::zero(); ctx.dim()];
        xi[i] = Rat::one();
        let tg = dunkl_apply(ctx, &xi, &g)?;
        let mut acc = Rat::zero();
        for (e2, c) in tg.terms() {
            acc += c * &go(ctx, s, e2, memo)?;
        }
        let v = acc * s;
        memo.lock().unwrap().insert(e.clone(), v.clone());
        Ok(v)
    }
    go(ctx, s, e, &memo)
}

fn monomial_moment_c64(ctx: &DunklContext, s: &Rat, e: &Exp) -> Result<Complex64> {
    let memo = {
        let mut map = ctx.moment_c64.lock().unwrap();
        map.entry(s.clone())
            .or_insert_with(|| Arc::new(Mutex::new(HashMap::new())))
            .clone()
    };
    fn go(
        ctx: &DunklContext,
        s: &Rat,
        e: &Exp,
        memo: &Mutex<HashMap<Exp, Complex64>>,
    ) -> Result<Complex64> {
        if exp_total(e) == 0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        if exp_total(e) % 2 == 1 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if let Some(v) = memo.lock().unwrap().get(e) {
            return Ok(*v);
        }
        let i = e.iter().position(|&k| k > 0).unwrap();
        let mut rest = e.clone();
        rest[i] -= 1;
        let g = Poly::<Complex64>::monomial(ctx.dim(), rest, Complex64::new(1.0, 0.0));
        let mut xi = vec![Complex64::new(0.0, 0.0); ctx.dim()];
        xi[i] = Complex64::new(1.0, 0.0);
        let tg = dunkl_apply(ctx, &xi, &g)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (e2, c) in tg.terms() {
            acc += c * go(ctx, s, e2, memo)?;
        }
        let v = acc * rat_to_f64(s);
        memo.lock().unwrap().insert(e.clone(), v);
        Ok(v)
    }
    go(ctx, s, e, &memo)
}

/// ∫ p dm_{μ,t} = (e^{tΔ_μ/2} p)(0), exact for rational input.
pub fn gaussian_moment<C: CtxCoeff>(ctx: &DunklContext, p: &Poly<C>, t: &Rat) -> Result<C> {
    if !t.is_positive() {
        return Err(DunklError::InvalidParameter("t must be > 0".into()));
    }
    let mut acc = C::zero();
    for (e, c) in p.terms() {
        let m = C::monomial_moment(ctx, t, e)?;
        acc = acc.add_ref(&c.mul_ref(&m));
    }
    Ok(acc)
}

/// The measure-ratio prefactor (s/t)^{γ_μ+N/2} occurring in
/// ∫ p e^{-x²/2s} dω_{μ,t} = (s/t)^{γ_μ+N/2} (e^{sΔ_μ/2} p)(0).
pub fn scaled_moment_prefactor(ctx: &DunklContext, s: &Rat, t: &Rat) -> Result<PowScale> {
    PowScale::new(s / t, ctx.measure_exponent())
}

/// ∫ p e^{-x²/2s} dω_{μ,t}: exact core moment at scale s plus the rational
/// power prefactor, returned separately so callers can keep it symbolic.
pub fn gaussian_moment_scaled<C: CtxCoeff>(
    ctx: &DunklContext,
    p: &Poly<C>,
    s: &Rat,
    t: &Rat,
) -> Result<(C, PowScale)> {
    if !s.is_positive() || !t.is_positive() {
        return Err(DunklError::InvalidParameter("scales must be > 0".into()));
    }
    let core = gaussian_moment(ctx, p, s)?;
    Ok((core, scaled_moment_prefactor(ctx, s, t)?))
}

/// M_ξ p = ⟨ξ,x⟩ · p.
pub fn multiply_coordinate<C: Coeff>(xi: &[C], p: &Poly<C>) -> Poly<C> {
    let n = p.nvars();
    let mut out = Poly::zero(n);
    for (j, w) in xi.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        for (e, c) in p.terms() {
            let mut e2 = e.clone();
            e2[j] += 1;
            out.insert_add(e2, c.mul_ref(w));
        }
    }
    out
}

/// Dunkl momentum operator P_{ξ,μ,t} = (t/i) T_{ξ,μ} = −i·t·T_{ξ,μ}.
pub fn momentum_apply(
    ctx: &DunklContext,
    xi: &[Rat],
    t: &Rat,
    p: &RPoly,
) -> Result<Poly<Complex64>> {
    if !t.is_positive() {
        return Err(DunklError::InvalidParameter("t must be > 0".into()));
    }
    let tp = dunkl_apply(ctx, xi, p)?;
    Ok(tp
        .to_complex()
        .scale(&Complex64::new(0.0, -rat_to_f64(t))))
}

/// Test oracle: the moment as literally (e^{tΔ/2}p)(0). Kept separate from
/// the ladder path so the two can check each other.
pub fn gaussian_moment_via_heat(ctx: &DunklContext, p: &RPoly, t: &Rat) -> Result<Rat> {
    let heated = heat_apply(ctx, t, p)?;
    Ok(heated.constant_term())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::coxeter::{
        build_root_system, generate_group, make_multiplicity, orbit_partition, RootSystemSpec,
    };
    use crate::scalar::{parse_rational, rat_int};
    use smallvec::smallvec;

    pub(crate) fn context(family: &str, n: usize, mu: &[&str]) -> DunklContext {
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
        DunklContext::new(rs, g, m).unwrap()
    }

    fn x_poly(n: usize, i: usize, k: u16) -> RPoly {
        let mut e = exp_zero(n);
        e[i] = k;
        RPoly::monomial(n, e, Rat::one())
    }

    #[test]
    fn z2_rank_one_values() {
        // Z₂ with multiplicity μ: T(x) = 1 + 2μ, T(x²) = 2x
        let mu = rat(5, 7);
        let ctx = context("A1^N", 1, &["5/7"]);
        let x = x_poly(1, 0, 1);
        let tx = dunkl_apply(&ctx, &[Rat::one()], &x).unwrap();
        assert_eq!(tx, RPoly::constant(1, Rat::one() + rat_int(2) * &mu));
        let x2 = x_poly(1, 0, 2);
        let tx2 = dunkl_apply(&ctx, &[Rat::one()], &x2).unwrap();
        assert_eq!(tx2, x.scale(&rat_int(2)));
    }

    #[test]
    fn trivial_multiplicity_is_directional_derivative() {
        let ctx = context("B", 2, &["0", "0"]);
        for e in [smallvec![2u16, 0], smallvec![1, 1], smallvec![3, 2]] {
            let p = RPoly::monomial(2, e, Rat::one());
            let xi = vec![rat(1, 3), rat(-2, 1)];
            let t = dunkl_apply(&ctx, &xi, &p).unwrap();
            assert_eq!(t, p.directional_derivative(&xi));
        }
        // μ≡0: dunkl_apply(e₁, x₁²) = 2x₁
        let p = x_poly(2, 0, 2);
        let t = dunkl_apply(&ctx, &[Rat::one(), Rat::zero()], &p).unwrap();
        assert_eq!(t, x_poly(2, 0, 1).scale(&rat_int(2)));
    }

    #[test]
    fn commutativity_battery_b2() {
        let ctx = context("B", 2, &["1/2", "3/2"]);
        let e1 = vec![Rat::one(), Rat::zero()];
        let e2 = vec![Rat::zero(), Rat::one()];
        for d in 0..=6usize {
            for e in super::super::monomials_of_degree(2, d) {
                let p = RPoly::monomial(2, e, Rat::one());
                let a = dunkl_apply(&ctx, &e2, &dunkl_apply(&ctx, &e1, &p).unwrap()).unwrap();
                let b = dunkl_apply(&ctx, &e1, &dunkl_apply(&ctx, &e2, &p).unwrap()).unwrap();
                assert_eq!(a, b, "commutator nonzero on {p:?}");
            }
        }
    }

    #[test]
    fn laplacian_values() {
        // classical: Δ₀(x₁²x₂) = 2x₂
        let ctx0 = context("B", 2, &["0", "0"]);
        let p = x_poly(2, 0, 2).mul(&x_poly(2, 1, 1));
        let lap = dunkl_laplacian(&ctx0, &p).unwrap();
        assert_eq!(lap, x_poly(2, 1, 1).scale(&rat_int(2)));
        // Δ_μ(x²) = 2N + 4γ, constant
        let ctx = context("B", 2, &["1/2", "3/2"]);
        let x2 = x_poly(2, 0, 2).add(&x_poly(2, 1, 2));
        let lap = dunkl_laplacian(&ctx, &x2).unwrap();
        let expected = rat_int(2 * 2) + rat_int(4) * ctx.gamma();
        assert_eq!(lap, RPoly::constant(2, expected));
        // Δ_μ annihilates degree ≤ 1
        let lin = x_poly(2, 0, 1).add(&RPoly::constant(2, rat(7, 2)));
        assert!(dunkl_laplacian(&ctx, &lin).unwrap().is_zero());
    }

    #[test]
    fn laplacian_frame_independence() {
        let ctx = context("B", 2, &["1/2", "3/2"]);
        let frame = vec![
            vec![rat(3, 5), rat(4, 5)],
            vec![rat(-4, 5), rat(3, 5)],
        ];
        for d in 0..=4usize {
            for e in super::super::monomials_of_degree(2, d) {
                let p = RPoly::monomial(2, e, Rat::one());
                let a = dunkl_laplacian(&ctx, &p).unwrap();
                let b = dunkl_laplacian_frame(&ctx, &frame, &p).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn heat_semigroup_and_examples() {
        let ctx = context("A1^N", 1, &["0"]);
        // heat(τ, 1) = 1
        assert_eq!(
            heat_apply(&ctx, &rat(5, 3), &RPoly::one(1)).unwrap(),
            RPoly::one(1)
        );
        // N=1, μ=0, τ=−1: x² ↦ x² − 1
        let h = heat_apply(&ctx, &rat(-1, 1), &x_poly(1, 0, 2)).unwrap();
        assert_eq!(h, x_poly(1, 0, 2).sub(&RPoly::one(1)));
        // semigroup: heat(τ₁)∘heat(τ₂) = heat(τ₁+τ₂) exactly, degree ≤ 6
        let ctx2 = context("B", 2, &["1/2", "3/2"]);
        let (t1, t2) = (rat(1, 3), rat(-3, 4));
        for e in super::super::monomials_of_degree(2, 6) {
            let p = RPoly::monomial(2, e, Rat::one());
            let a = heat_apply(&ctx2, &t1, &heat_apply(&ctx2, &t2, &p).unwrap()).unwrap();
            let b = heat_apply(&ctx2, &(&t1 + &t2), &p).unwrap();
            assert_eq!(a, b);
        }
        // degree-4 input has exactly the k = 0,1,2 terms: heat(τ) shifts the
        // constant by both Δ and Δ² contributions
        let p4 = x_poly(1, 0, 4);
        let h4 = heat_apply(&ctx, &rat(1, 1), &p4).unwrap();
        assert_eq!(h4.degree(), 4);
        assert!(!h4.constant_term().is_zero());
    }

    #[test]
    fn heat_dilation_commutation() {
        // heat(−t)·δ_{t^{-1/2}} = δ_{t^{-1/2}}·heat(−1) on monomials ≤ 6,
        // split by parity so everything stays rational
        let ctx = context("A1^N", 2, &["1", "2"]);
        let t = rat(1, 2);
        let s = t.recip(); // λ² for λ = t^{-1/2}
        for d in 0..=6usize {
            for e in super::super::monomials_of_degree(2, d) {
                let p = RPoly::monomial(2, e, Rat::one());
                let (de, do_) = dilate_sqrt_exact(&s, &p).unwrap();
                let lhs_e = heat_apply(&ctx, &-t.clone(), &de).unwrap();
                let lhs_o = heat_apply(&ctx, &-t.clone(), &do_).unwrap();
                let h1 = heat_apply(&ctx, &rat(-1, 1), &p).unwrap();
                let (rhs_e, rhs_o) = dilate_sqrt_exact(&s, &h1).unwrap();
                assert_eq!(lhs_e, rhs_e);
                assert_eq!(lhs_o, rhs_o);
            }
        }
    }

    #[test]
    fn dilate_basics() {
        let p = x_poly(2, 0, 3);
        let q = dilate(&rat(2, 1), &p).unwrap();
        assert_eq!(q, p.scale(&rat_int(8)));
        assert_eq!(dilate(&Rat::one(), &p).unwrap(), p);
        assert!(dilate(&rat(-1, 1), &p).is_err());
        assert!(dilate(&Rat::zero(), &p).is_err());
    }

    #[test]
    fn fischer_pair_values() {
        let ctx = context("A1^N", 1, &["2/3"]);
        let one = RPoly::one(1);
        assert_eq!(fischer_pair(&ctx, &one, &one, &rat(1, 2)).unwrap(), Rat::one());
        // [x,x]_{μ,1} = 1+2μ
        let x = x_poly(1, 0, 1);
        assert_eq!(
            fischer_pair(&ctx, &x, &x, &Rat::one()).unwrap(),
            Rat::one() + rat(4, 3)
        );
        // different homogeneous degrees pair to zero
        assert!(fischer_pair(&ctx, &x, &x_poly(1, 0, 2), &Rat::one())
            .unwrap()
            .is_zero());
        // symmetry on a random-ish pair
        let ctx2 = context("B", 2, &["1/2", "3/2"]);
        let p = x_poly(2, 0, 2).mul(&x_poly(2, 1, 1));
        let q = x_poly(2, 1, 3).add(&x_poly(2, 0, 1).scale(&rat(1, 2)));
        let t = rat(3, 2);
        assert_eq!(
            fischer_pair(&ctx2, &p, &q, &t).unwrap(),
            fischer_pair(&ctx2, &q, &p, &t).unwrap()
        );
        assert!(fischer_pair(&ctx2, &p, &q, &rat(-1, 1)).is_err());
    }

    #[test]
    fn moment_examples_and_oracle_agreement() {
        let ctx = context("A1^N", 1, &["1"]);
        // ∫ dm = 1
        for t in [rat(1, 2), Rat::one(), rat_int(2)] {
            assert_eq!(gaussian_moment(&ctx, &RPoly::one(1), &t).unwrap(), Rat::one());
        }
        // Z₂: moment of x² at t=1 is 1+2μ
        let x2 = x_poly(1, 0, 2);
        assert_eq!(
            gaussian_moment(&ctx, &x2, &Rat::one()).unwrap(),
            rat_int(3)
        );
        // classical N=1 μ=0: moment of x² = t
        let ctx0 = context("A1^N", 1, &["0"]);
        assert_eq!(
            gaussian_moment(&ctx0, &x2, &rat(1, 2)).unwrap(),
            rat(1, 2)
        );
        // ladder path agrees with the heat-at-zero definition
        let ctx2 = context("B", 2, &["1/2", "3/2"]);
        for d in 0..=6usize {
            for e in super::super::monomials_of_degree(2, d) {
                let p = RPoly::monomial(2, e.clone(), Rat::one());
                let t = rat(2, 3);
                assert_eq!(
                    gaussian_moment(&ctx2, &p, &t).unwrap(),
                    gaussian_moment_via_heat(&ctx2, &p, &t).unwrap(),
                    "moment mismatch on {e:?}"
                );
            }
        }
    }

    #[test]
    fn fischer_equals_heat_transported_moment() {
        // [p,q]_t = ∫ (e^{-tΔ/2}p)(e^{-tΔ/2}q) dm_t, exactly
        let ctx = context("B", 2, &["1/2", "3/2"]);
        let t = rat(1, 2);
        let p = x_poly(2, 0, 3).add(&x_poly(2, 1, 2));
        let q = x_poly(2, 0, 1).mul(&x_poly(2, 1, 2)).sub(&RPoly::one(2));
        let lhs = fischer_pair(&ctx, &p, &q, &t).unwrap();
        let hp = heat_apply(&ctx, &-t.clone(), &p).unwrap();
        let hq = heat_apply(&ctx, &-t.clone(), &q).unwrap();
        let rhs = gaussian_moment(&ctx, &hp.mul(&hq), &t).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn coordinate_and_momentum() {
        let p = RPoly::one(2);
        let m = multiply_coordinate(&[Rat::one(), Rat::zero()], &p);
        assert_eq!(m, x_poly(2, 0, 1));
        let ctx = context("A1^N", 2, &["1", "1"]);
        let pm = momentum_apply(&ctx, &[Rat::one(), Rat::zero()], &rat(1, 2), &p).unwrap();
        assert!(pm.is_zero());
        // distributivity of M_ξ
        let a = x_poly(2, 0, 2);
        let b = x_poly(2, 1, 3).scale(&rat(2, 5));
        let xi = [rat(1, 2), rat(-1, 3)];
        assert_eq!(
            multiply_coordinate(&xi, &a.add(&b)),
            multiply_coordinate(&xi, &a).add(&multiply_coordinate(&xi, &b))
        );
    }

    #[test]
    fn moment_scaled_prefactor() {
        let ctx = context("A1^N", 1, &["1"]);
        let (core, scale) = gaussian_moment_scaled(&ctx, &RPoly::one(1), &rat(1, 2), &Rat::one()).unwrap();
        assert_eq!(core, Rat::one());
        // (s/t)^{γ+1/2} with γ = 1: (1/2)^{3/2}
        let exact = scale.to_exact().unwrap();
        assert!((exact.to_f64() - 0.5f64.powf(1.5)).abs() < 1e-15);
    }
}
