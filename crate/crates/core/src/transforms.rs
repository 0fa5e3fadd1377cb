//! The integral transforms and their unitarity machinery: versions A, B, C
//! on truncated Hermite spans, the ground-state transform, the Dunkl
//! transform, translation of the Gaussian, convolution, and the holomorphic
//! inner products.
//!
//! Every transform integral is computed with z kept symbolic and the
//! q-integration done by the exact moment functional: the integrand is
//! always (polynomial) × (Gaussian) × dω, with the Gaussian scales combined
//! as 1/(4s) sums. Truncation enters only through the kernel table, so the
//! analytic truncation error is cleanly separated from quadrature error
//! (there is none).

use crate::dunklkernel::KernelTable;
use crate::error::{DunklError, Result};
use crate::hermite::{HermiteFamily, OrthogonalBasis};
use crate::polyring::{exp_total, gaussian_moment, CPoly, DunklContext, Exp, RPoly};
use crate::scalar::{rat, rat_pow, rat_to_f64, PowScale, Rat};
use num::complex::Complex64;
use num::{One, Signed, Zero};

/// Finite span Σ c_ν h_{t;ν} (or Σ c_ν H_{t;ν} when used in the ground-state
/// space; the coefficient data is the same, the Gaussian envelope is not).
#[derive(Clone, Debug)]
pub struct HermiteSpan {
    pub t: Rat,
    pub terms: Vec<(Exp, Complex64)>,
}

impl HermiteSpan {
    pub fn single(t: Rat, nu: Exp) -> Self {
        HermiteSpan {
            t,
            terms: vec![(nu, Complex64::new(1.0, 0.0))],
        }
    }

    pub fn max_degree(&self) -> usize {
        self.terms
            .iter()
            .map(|(nu, _)| exp_total(nu))
            .max()
            .unwrap_or(0)
    }

    /// Pointwise value as an element of L²(ω_{μ,t}): Σ c_ν h_{t;ν}(x).
    pub fn eval_h(&self, family: &HermiteFamily, x: &[f64]) -> Result<Complex64> {
        let mut acc = Complex64::zero();
        for (nu, c) in &self.terms {
            acc += c * family.hermite_function_eval(nu, x)?;
        }
        Ok(acc)
    }
}

/// z ↦ e^{-z²/2t'} P(z) with truncation metadata.
#[derive(Clone, Debug)]
pub struct HolomorphicImage {
    pub envelope_t: Rat,
    pub poly: CPoly,
    pub truncation_degree: usize,
    /// Max degree of the span that produced this image (drives the
    /// evaluation-time tail heuristic).
    pub source_degree: usize,
}

impl HolomorphicImage {
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let z_sq: Complex64 = z.iter().map(|c| c * c).sum();
        let env = (-z_sq / (2.0 * rat_to_f64(&self.envelope_t))).exp();
        env * self.poly.eval(z)
    }

    /// Heuristic pointwise truncation-tail bound: the dropped series terms
    /// behave like |z|^{d₀} Σ_{k>K} (|z|²/2t')^k / k! under the envelope.
    pub fn eval_tail(&self, z: &[Complex64]) -> f64 {
        let z_norm: f64 = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let z_sq: Complex64 = z.iter().map(|c| c * c).sum();
        let t = rat_to_f64(&self.envelope_t);
        let env = (-z_sq / (2.0 * t)).exp().norm();
        let d0 = self.source_degree;
        let remaining = self.truncation_degree.saturating_sub(d0) / 2;
        env * z_norm.powi(d0 as i32)
            * crate::dunklkernel::tail_estimate(remaining, z_norm * z_norm / (2.0 * t))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let probe = vec![Complex64::new(1.0, 0.0); self.poly.nvars()];
        serde_json::json!({
            "envelope_t": crate::scalar::rat_to_string(&self.envelope_t),
            "poly": crate::polyring::cpoly_to_json(&self.poly),
            "truncation_degree": self.truncation_degree,
            "tail": format!("{:.16e}", self.eval_tail(&probe)),
        })
    }
}

/// scalar · P(q) · e^{-q²/4v}: the common shape of every transform input
/// (Hermite spans, dilated spans, plain Gaussians).
#[derive(Clone, Debug)]
pub struct GaussianInput {
    pub poly: RPoly,
    pub envelope_v: Rat,
    pub scalar: Complex64,
}

/// Combine e^{-q²/4a} · e^{-q²/4b} = e^{-q²/2s}: 1/(2s) = 1/(4a) + 1/(4b).
fn combine_quarter_scales(a: &Rat, b: &Rat) -> Rat {
    rat(2, 1) * a * b / (a + b)
}

/// Σ_n t^{-n} Σ_{x-monomials a of E_n} z^a · ∫ e_a(q) P(q) dm_{μ,s}(q):
/// the shared symbolic-z reduction behind every kernel transform.
fn kernel_reduction(
    ctx: &DunklContext,
    table: &KernelTable,
    p: &RPoly,
    s: &Rat,
    t: &Rat,
) -> Result<RPoly> {
    let mut out = RPoly::zero(ctx.dim());
    let mut t_pow = Rat::one();
    for n in 0..=table.degree {
        if n > 0 {
            t_pow /= t;
        }
        for (a, e_a) in table.split_by_x(n)?.iter() {
            let m = gaussian_moment(ctx, &e_a.mul(p), s)?;
            if !m.is_zero() {
                out.insert_add(a.clone(), m * &t_pow);
            }
        }
    }
    Ok(out)
}

/// A_{μ,t} applied to P(q)e^{-q²/4v}: envelope e^{-z²/2t} times an exact
/// polynomial, with the measure-ratio prefactor returned symbolically.
pub fn a_image_exact(
    ctx: &DunklContext,
    table: &KernelTable,
    p: &RPoly,
    v: &Rat,
    t: &Rat,
) -> Result<(RPoly, PowScale)> {
    // the kernel contributes e^{-q²/4t}, the input e^{-q²/4v}
    let s = combine_quarter_scales(t, v);
    let poly = kernel_reduction(ctx, table, p, &s, t)?;
    Ok((poly, PowScale::new(&s / t, ctx.measure_exponent())?))
}

/// Version B path (i): the kernel ρ(z,q)/ρ(0,q) integrated against dm_{μ,t}.
/// The ground-state density supplies the full e^{-q²/2t}, so the moment runs
/// at scale t with no prefactor.
pub fn b_image_exact(ctx: &DunklContext, table: &KernelTable, p: &RPoly, t: &Rat) -> Result<RPoly> {
    kernel_reduction(ctx, table, p, t, t)
}

/// Version C kernel path: ρ(z,q) against dω_{μ,t} applied to P(q)e^{-q²/4v}.
pub fn c_image_exact(
    ctx: &DunklContext,
    table: &KernelTable,
    p: &RPoly,
    v: &Rat,
    t: &Rat,
) -> Result<(RPoly, PowScale)> {
    // e^{-q²/2t} from ρ plus e^{-q²/4v}: 1/(2s) = 1/(2t) + 1/(4v)
    let s = rat(2, 1) * t * v / (rat(2, 1) * v + t);
    let poly = kernel_reduction(ctx, table, p, &s, t)?;
    Ok((poly, PowScale::new(&s / t, ctx.measure_exponent())?))
}

fn check_truncation(table: &KernelTable, span_degree: usize) -> Result<()> {
    if table.degree < span_degree + 4 {
        return Err(DunklError::TruncationTooLow {
            available: table.degree,
            required: span_degree + 4,
        });
    }
    Ok(())
}

fn span_inputs(family: &HermiteFamily, span: &HermiteSpan) -> Result<Vec<GaussianInput>> {
    if span.t != family.t {
        return Err(DunklError::InvalidParameter(
            "span parameter differs from family parameter".into(),
        ));
    }
    span.terms
        .iter()
        .map(|(nu, c)| {
            Ok(GaussianInput {
                poly: family.hermite_unnormalized(nu)?.clone(),
                envelope_v: family.t.clone(),
                scalar: c * family.norm_scale_f64(nu)?,
            })
        })
        .collect()
}

fn accumulate_image(
    nvars: usize,
    images: Vec<(RPoly, PowScale, Complex64)>,
    envelope_t: Rat,
    table: &KernelTable,
    source_degree: usize,
) -> HolomorphicImage {
    let mut poly = CPoly::zero(nvars);
    for (rp, scale, scalar) in images {
        let factor = scalar * scale.to_f64();
        poly = poly.add(&rp.to_complex().scale(&factor));
    }
    HolomorphicImage {
        envelope_t,
        poly,
        truncation_degree: table.degree,
        source_degree,
    }
}

/// Version A Segal-Bargmann transform of a Hermite span.
pub fn transform_a(
    ctx: &DunklContext,
    table: &KernelTable,
    family: &HermiteFamily,
    psi: &HermiteSpan,
) -> Result<HolomorphicImage> {
    check_truncation(table, psi.max_degree())?;
    let t = family.t.clone();
    let images = span_inputs(family, psi)?
        .into_iter()
        .map(|input| {
            let (p, scale) = a_image_exact(ctx, table, &input.poly, &input.envelope_v, &t)?;
            Ok((p, scale, input.scalar))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(accumulate_image(ctx.dim(), images, t, table, psi.max_degree()))
}

/// Version A applied to a general Gaussian-with-polynomial input at
/// parameter t (the input need not sit at the transform's own scale).
pub fn transform_a_gaussian(
    ctx: &DunklContext,
    table: &KernelTable,
    input: &GaussianInput,
    t: &Rat,
) -> Result<HolomorphicImage> {
    check_truncation(table, input.poly.degree())?;
    let (p, scale) = a_image_exact(ctx, table, &input.poly, &input.envelope_v, t)?;
    Ok(accumulate_image(
        ctx.dim(),
        vec![(p, scale, input.scalar)],
        t.clone(),
        table,
        input.poly.degree(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BPath {
    /// Direct kernel ρ/ρ(0,·) against dm_{μ,t}.
    DirectKernel,
    /// Composition A_{μ,t} ∘ V⁻¹ (ground-state transport of the span).
    ViaGroundState,
}

/// Version B transform of φ = Σ c_ν H_{t;ν} ∈ L²(m_{μ,t}).
pub fn transform_b(
    ctx: &DunklContext,
    table: &KernelTable,
    family: &HermiteFamily,
    phi: &HermiteSpan,
    path: BPath,
) -> Result<HolomorphicImage> {
    check_truncation(table, phi.max_degree())?;
    let t = family.t.clone();
    match path {
        BPath::DirectKernel => {
            let images = span_inputs(family, phi)?
                .into_iter()
                .map(|input| {
                    let p = b_image_exact(ctx, table, &input.poly, &t)?;
                    Ok((p, PowScale::one(), input.scalar))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(accumulate_image(ctx.dim(), images, t, table, phi.max_degree()))
        }
        BPath::ViaGroundState => {
            // V⁻¹ maps the H-basis to the h-basis with the same coefficients
            let psi = ground_state_span(GroundStateDirection::Inverse, phi);
            transform_a(ctx, table, family, &psi)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CPath {
    /// The kernel ρ(z,q) against dω_{μ,t}.
    Kernel,
    /// Through the A-kernel product split: the extra A(0,q) factor joins the
    /// input Gaussian, then the A machinery runs.
    ViaA,
}

/// Version C transform of ψ = Σ c_ν h_{t;ν} ∈ L²(ω_{μ,t}).
pub fn transform_c(
    ctx: &DunklContext,
    table: &KernelTable,
    family: &HermiteFamily,
    psi: &HermiteSpan,
    path: CPath,
) -> Result<HolomorphicImage> {
    check_truncation(table, psi.max_degree())?;
    let t = family.t.clone();
    let images = span_inputs(family, psi)?
        .into_iter()
        .map(|input| match path {
            CPath::Kernel => {
                let (p, scale) = c_image_exact(ctx, table, &input.poly, &input.envelope_v, &t)?;
                Ok((p, scale, input.scalar))
            }
            CPath::ViaA => {
                // A(0,q) = e^{-q²/4t} folds into the input envelope:
                // 1/(4v') = 1/(4v) + 1/(4t)
                let v2 = &input.envelope_v * &t / (&input.envelope_v + &t);
                let (p, scale) = a_image_exact(ctx, table, &input.poly, &v2, &t)?;
                Ok((p, scale, input.scalar))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(accumulate_image(ctx.dim(), images, t, table, psi.max_degree()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroundStateDirection {
    /// V: L²(ω_{μ,t}) → L²(m_{μ,t}), division by e^{-x²/4t}.
    Forward,
    /// V⁻¹: multiplication by e^{-x²/4t}.
    Inverse,
}

/// On basis spans the ground-state transform is a relabeling h ↔ H with the
/// same coefficients; the Gaussian envelope moves between the measures.
pub fn ground_state_span(_direction: GroundStateDirection, span: &HermiteSpan) -> HermiteSpan {
    span.clone()
}

/// Pointwise ground-state action on a function value at x.
pub fn ground_state_pointwise(
    t: &Rat,
    direction: GroundStateDirection,
    value: Complex64,
    x: &[f64],
) -> Result<Complex64> {
    if !t.is_positive() {
        return Err(DunklError::InvalidParameter("t must be > 0".into()));
    }
    let x_sq: f64 = x.iter().map(|c| c * c).sum();
    let gauss = (-x_sq / (4.0 * rat_to_f64(t))).exp();
    Ok(match direction {
        GroundStateDirection::Forward => value / gauss,
        GroundStateDirection::Inverse => value * gauss,
    })
}

/// The Dunkl transform of P(x)e^{-x²/4v} as a pair of exact polynomials:
/// 𝓕ψ(k) = prefactor · (re(k) + i·im(k)).
pub fn fourier_image(
    ctx: &DunklContext,
    table: &KernelTable,
    p: &RPoly,
    v: &Rat,
    t: &Rat,
) -> Result<(RPoly, RPoly, PowScale)> {
    // E(−ik/√t, x/√t) = Σ t^{-n}(−i)ⁿ E_n(k,x); the input Gaussian alone
    // sets the moment scale: 1/(2s) = 1/(4v)
    let s = rat(2, 1) * v;
    let mut re = RPoly::zero(ctx.dim());
    let mut im = RPoly::zero(ctx.dim());
    let mut t_pow = Rat::one();
    for n in 0..=table.degree {
        if n > 0 {
            t_pow /= t;
        }
        // (−i)ⁿ: n ≡ 0 → +1, 1 → −i, 2 → −1, 3 → +i
        let (goes_to_re, sign): (bool, i64) = match n % 4 {
            0 => (true, 1),
            1 => (false, -1),
            2 => (true, -1),
            _ => (false, 1),
        };
        for (a, e_a) in table.split_by_x(n)?.iter() {
            let m = gaussian_moment(ctx, &e_a.mul(p), &s)?;
            if m.is_zero() {
                continue;
            }
            let val = m * &t_pow * rat(sign, 1);
            if goes_to_re {
                re.insert_add(a.clone(), val);
            } else {
                im.insert_add(a.clone(), val);
            }
        }
    }
    Ok((re, im, PowScale::new(&s / t, ctx.measure_exponent())?))
}

/// 𝓕_{μ,t}ψ(k) for a Hermite span at real rational k.
pub fn dunkl_fourier(
    ctx: &DunklContext,
    table: &KernelTable,
    family: &HermiteFamily,
    psi: &HermiteSpan,
    k: &[Rat],
) -> Result<Complex64> {
    check_truncation(table, psi.max_degree())?;
    let t = family.t.clone();
    let kf: Vec<f64> = k.iter().map(rat_to_f64).collect();
    let mut acc = Complex64::zero();
    for input in span_inputs(family, psi)? {
        let (re, im, scale) = fourier_image(ctx, table, &input.poly, &input.envelope_v, &t)?;
        let val = Complex64::new(re.eval_f64(&kf), im.eval_f64(&kf));
        acc += input.scalar * scale.to_f64() * val;
    }
    Ok(acc)
}

/// 𝓕_{μ,t}σ_{μ,t}(k): the transform of the plain Gaussian e^{-q²/2t}
/// (P = 1, envelope v = t/2). The fixed point 𝓕σ = σ is checked against this.
pub fn dunkl_fourier_gaussian(
    ctx: &DunklContext,
    table: &KernelTable,
    t: &Rat,
    k: &[Rat],
) -> Result<Complex64> {
    let half_t = t / rat(2, 1);
    let (re, im, scale) = fourier_image(ctx, table, &RPoly::one(ctx.dim()), &half_t, t)?;
    let kf: Vec<f64> = k.iter().map(rat_to_f64).collect();
    Ok(scale.to_f64() * Complex64::new(re.eval_f64(&kf), im.eval_f64(&kf)))
}

/// 𝒯_{μ,x}σ_{μ,t}(q) by the double-kernel moment integral
/// ∫ dω_{μ,t}(k) E(k/√t, iq/√t) E(−ix/√t, k/√t) e^{-k²/2t},
/// computed exactly for rational x, q.
pub fn translate_heat(
    ctx: &DunklContext,
    table: &KernelTable,
    t: &Rat,
    x: &[Rat],
    q: &[Rat],
) -> Result<f64> {
    if !t.is_positive() {
        return Err(DunklError::InvalidParameter("t must be > 0".into()));
    }
    let d = table.degree;
    // E_n(k, iq) = iⁿ E_n(k, q): fix the y-block at q, leaving k-polys
    let e_first: Vec<RPoly> = (0..=d)
        .map(|n| table.partial_eval_y(n, q))
        .collect::<Result<_>>()?;
    // E_m(−ix, k) = (−i)^m E_m(x, k): fix the x-block at x
    let e_second: Vec<RPoly> = (0..=d)
        .map(|m| table.partial_eval_x(m, x))
        .collect::<Result<_>>()?;
    let mut acc = Rat::zero();
    let mut t_pow_n = Rat::one();
    for n in 0..=d {
        if n > 0 {
            t_pow_n /= t;
        }
        if e_first[n].is_zero() {
            continue;
        }
        let mut t_pow = t_pow_n.clone();
        for m in 0..=d {
            if m > 0 {
                t_pow /= t;
            }
            if (n + m) % 2 == 1 || e_second[m].is_zero() {
                continue;
            }
            // iⁿ(−i)^m = (−1)^{(n−m)/2} when n+m is even
            let sign = if (n as i64 - m as i64).rem_euclid(4) == 2 {
                -Rat::one()
            } else {
                Rat::one()
            };
            let prod = e_first[n].mul(&e_second[m]);
            let moment = gaussian_moment(ctx, &prod, t)?;
            if !moment.is_zero() {
                acc += sign * moment * &t_pow;
            }
        }
    }
    Ok(rat_to_f64(&acc))
}

/// (σ_{μ,t} ∗_{μ,t} ψ)(x) = ∫ dω_{μ,t}(q) ρ_{μ,t}(x,q) ψ(q) by the moment
/// functional, at a real rational point x.
pub fn convolve_heat(
    ctx: &DunklContext,
    table: &KernelTable,
    family: &HermiteFamily,
    psi: &HermiteSpan,
    x: &[Rat],
) -> Result<f64> {
    check_truncation(table, psi.max_degree())?;
    let t = family.t.clone();
    let x_sq: Rat = x.iter().map(|c| c * c).sum();
    let env = (-rat_to_f64(&x_sq) / (2.0 * rat_to_f64(&t))).exp();
    let mut acc = Complex64::zero();
    for input in span_inputs(family, psi)? {
        // ρ supplies e^{-q²/2t}, the input e^{-q²/4v}
        let s = rat(2, 1) * &t * &input.envelope_v / (rat(2, 1) * &input.envelope_v + &t);
        let prefactor = PowScale::new(&s / &t, ctx.measure_exponent())?;
        let mut core = Rat::zero();
        let mut t_pow = Rat::one();
        for n in 0..=table.degree {
            if n > 0 {
                t_pow /= &t;
            }
            let e_n_at_x = table.partial_eval_x(n, x)?;
            if e_n_at_x.is_zero() {
                continue;
            }
            let m = gaussian_moment(ctx, &e_n_at_x.mul(&input.poly), &s)?;
            core += m * &t_pow;
        }
        acc += input.scalar * prefactor.to_f64() * rat_to_f64(&core);
    }
    Ok(env * acc.re)
}

/// Element of the holomorphic pairing: a bare polynomial or an envelope image.
pub enum BSpaceElement<'a> {
    Poly(&'a CPoly),
    Image(&'a HolomorphicImage),
}

/// Expand e^{-z²/2t'}·P(z) as a polynomial of total degree ≤ cap. Every
/// coefficient up to the cap is the complete convolution of the envelope
/// series with P, so the only loss is the dropped degrees > cap.
pub fn expand_image(img: &HolomorphicImage, cap: usize) -> Result<CPoly> {
    if img.poly.degree() > cap {
        return Err(DunklError::DegreeOverflow {
            required: img.poly.degree(),
            cap,
        });
    }
    let n = img.poly.nvars();
    let mut z_sq = CPoly::zero(n);
    for j in 0..n {
        let mut e = crate::polyring::exp_zero(n);
        e[j] = 2;
        z_sq.insert_add(e, Complex64::new(1.0, 0.0));
    }
    let neg_half_over_t = Complex64::new(-1.0 / (2.0 * rat_to_f64(&img.envelope_t)), 0.0);
    let mut out = CPoly::zero(n);
    let mut series_term = CPoly::one(n);
    let mut j = 0usize;
    loop {
        // series_term = (−z²/2t')^j / j!
        let product = series_term.mul(&img.poly);
        for (e, c) in product.terms() {
            if exp_total(e) <= cap {
                out.insert_add(e.clone(), *c);
            }
        }
        j += 1;
        if 2 * j > cap {
            break;
        }
        series_term = series_term.mul(&z_sq).scale(&(neg_half_over_t / j as f64));
    }
    Ok(out)
}

/// ⟨⟨f₁, f₂⟩⟩_{μ,t}: the sesquilinear Fischer pairing (anti-linear in the
/// first slot), computed degreewise through the monomial Gram matrices.
pub fn bspace_inner(
    basis: &OrthogonalBasis,
    t: &Rat,
    f1: &BSpaceElement,
    f2: &BSpaceElement,
    expansion_cap: usize,
) -> Result<Complex64> {
    if expansion_cap > basis.max_degree {
        return Err(DunklError::DegreeOverflow {
            required: expansion_cap,
            cap: basis.max_degree,
        });
    }
    let p1 = match f1 {
        BSpaceElement::Poly(p) => (*p).clone(),
        BSpaceElement::Image(img) => expand_image(img, expansion_cap)?,
    };
    let p2 = match f2 {
        BSpaceElement::Poly(p) => (*p).clone(),
        BSpaceElement::Image(img) => expand_image(img, expansion_cap)?,
    };
    let max_d = p1.degree().max(p2.degree());
    if max_d > basis.max_degree {
        return Err(DunklError::DegreeOverflow {
            required: max_d,
            cap: basis.max_degree,
        });
    }
    let mut acc = Complex64::zero();
    let tf = rat_to_f64(t);
    let mut t_pow = 1.0f64;
    for d in 0..=max_d {
        if d > 0 {
            t_pow *= tf;
        }
        let a = p1.homogeneous_component(d);
        let b = p2.homogeneous_component(d);
        if a.is_zero() || b.is_zero() {
            continue;
        }
        let data = basis.calc.degree(d)?;
        let va = basis.calc.coords_of(d, &a)?;
        let vb = basis.calc.coords_of(d, &b)?;
        let mut inner = Complex64::zero();
        for (ai, ca) in va.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            let mut row_sum = Complex64::zero();
            for (bi, cb) in vb.iter().enumerate() {
                if !cb.is_zero() {
                    row_sum += cb * rat_to_f64(&data.gram[ai][bi]);
                }
            }
            inner += ca.conj() * row_sum;
        }
        acc += inner * t_pow;
    }
    Ok(acc)
}

/// Exact rational pairing of real polynomials: [p, q]_{μ,t}.
pub fn bspace_inner_exact(
    basis: &OrthogonalBasis,
    t: &Rat,
    p1: &RPoly,
    p2: &RPoly,
) -> Result<Rat> {
    let max_d = p1.degree().max(p2.degree());
    if max_d > basis.max_degree {
        return Err(DunklError::DegreeOverflow {
            required: max_d,
            cap: basis.max_degree,
        });
    }
    let mut acc = Rat::zero();
    for d in 0..=max_d {
        let a = p1.homogeneous_component(d);
        let b = p2.homogeneous_component(d);
        if a.is_zero() || b.is_zero() {
            continue;
        }
        let va = basis.calc.coords_of(d, &a)?;
        let vb = basis.calc.coords_of(d, &b)?;
        acc += basis.calc.gram_pair(d, &va, &vb)? * rat_pow(t, d as i64);
    }
    Ok(acc)
}

/// G f(z) = 2^{γ/2+N/4} f(2z) / A_{μ,2t}(2z,0): an envelope-t image becomes
/// an envelope-t/2 image with coefficients dilated by 2^{|κ|}.
pub fn g_map(ctx: &DunklContext, img: &HolomorphicImage, t: &Rat) -> Result<HolomorphicImage> {
    if &img.envelope_t != t {
        return Err(DunklError::InvalidParameter(
            "G map expects an image at envelope scale t".into(),
        ));
    }
    let scale = PowScale::new(rat(2, 1), ctx.measure_exponent() / rat(2, 1))?.to_f64();
    let two = Complex64::new(2.0, 0.0);
    let dilated = crate::polyring::dilate(&two, &img.poly)?;
    Ok(HolomorphicImage {
        envelope_t: t / rat(2, 1),
        poly: dilated.scale(&Complex64::new(scale, 0.0)),
        truncation_degree: img.truncation_degree,
        source_degree: img.source_degree,
    })
}

/// ⟨f₁, f₂⟩_{𝓒_{μ,t}} = ⟨G f₁, G f₂⟩_{𝓑_{μ,t/2}} for transform-C images.
pub fn cspace_inner(
    ctx: &DunklContext,
    basis: &OrthogonalBasis,
    t: &Rat,
    f1: &HolomorphicImage,
    f2: &HolomorphicImage,
    expansion_cap: usize,
) -> Result<Complex64> {
    let g1 = g_map(ctx, f1, t)?;
    let g2 = g_map(ctx, f2, t)?;
    let half_t = t / rat(2, 1);
    bspace_inner(
        basis,
        &half_t,
        &BSpaceElement::Image(&g1),
        &BSpaceElement::Image(&g2),
        expansion_cap,
    )
}

/// ‖Σ c_ν Ĥ_{t;ν}·e^{-q²/4t}‖²_{L²(ω_{μ,s})} for exact rational coefficients:
/// returns (moment core, measure prefactor (t/s)^{γ+N/2}) so the scale
/// relation between different s can be checked exactly.
pub fn span_omega_norm_exact(
    ctx: &DunklContext,
    family: &HermiteFamily,
    coeffs: &[(Exp, Rat)],
    measure_s: &Rat,
) -> Result<(Rat, PowScale)> {
    let t = family.t.clone();
    let mut p = RPoly::zero(ctx.dim());
    for (nu, c) in coeffs {
        p.add_scaled_assign(family.hermite_unnormalized(nu)?, c);
    }
    let core = gaussian_moment(ctx, &p.mul(&p), &t)?;
    Ok((core, PowScale::new(&t / measure_s, ctx.measure_exponent())?))
}

/// The BSO transform: ∫ dω̃_{μ,1}(y) BSO(z,y) φ(y) for φ = P(y)e^{-y²/4v};
/// BSO(z,y) = 2^{γ+N/2} c_μ^{-1/2} e^{-z²/2-y²} E(√2 y, √2 z).
pub fn bso_transform(
    ctx: &DunklContext,
    table: &KernelTable,
    input: &GaussianInput,
    c_mu: f64,
) -> Result<HolomorphicImage> {
    check_truncation(table, input.poly.degree())?;
    let one = Rat::one();
    // combined Gaussian: e^{-y²}·e^{-y²/4v}: 1/(2s) = 1 + 1/(4v)
    let s = rat(2, 1) * &input.envelope_v / (rat(4, 1) * &input.envelope_v + &one);
    // dω̃_{μ,1} = c_μ dω_{μ,1}: measure factor c_μ · (s/1)^{γ+N/2}
    let prefactor = PowScale::new(s.clone(), ctx.measure_exponent())?;
    let mut poly = RPoly::zero(ctx.dim());
    let mut two_pow = Rat::one();
    for n in 0..=table.degree {
        if n > 0 {
            two_pow *= rat(2, 1);
        }
        // E_n(√2 y, √2 z) = 2ⁿ E_n(y, z): group by the z-block
        for (a, e_a) in table.split_by_y(n)?.iter() {
            let m = gaussian_moment(ctx, &e_a.mul(&input.poly), &s)?;
            if !m.is_zero() {
                poly.insert_add(a.clone(), m * &two_pow);
            }
        }
    }
    let overall = input.scalar
        * c_mu
        * prefactor.to_f64()
        * 2f64.powf(rat_to_f64(&ctx.measure_exponent()))
        / c_mu.sqrt();
    Ok(HolomorphicImage {
        envelope_t: one,
        poly: poly.to_complex().scale(&overall),
        truncation_degree: table.degree,
        source_degree: input.poly.degree(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coxeter::{
        build_root_system, generate_group, make_multiplicity, orbit_partition, RootSystemSpec,
    };
    use crate::dunklkernel::build_kernel_blocks;
    use crate::hermite::DegreeOrder;
    use crate::scalar::parse_rational;
    use smallvec::smallvec;
    use std::sync::Arc;

    fn setup(
        family: &str,
        n: usize,
        mu: &[&str],
        t: Rat,
        degree: usize,
    ) -> (
        Arc<DunklContext>,
        KernelTable,
        Arc<OrthogonalBasis>,
        HermiteFamily,
    ) {
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
        let ctx = Arc::new(DunklContext::new(rs, g, m).unwrap());
        let table = build_kernel_blocks(&ctx, degree).unwrap();
        let basis =
            Arc::new(OrthogonalBasis::build(ctx.clone(), degree, DegreeOrder::GradedLex).unwrap());
        let fam = HermiteFamily::build(basis.clone(), t).unwrap();
        (ctx, table, basis, fam)
    }

    #[test]
    fn transform_a_ground_state_is_constant_one() {
        // ψ = h_{t;0} → φ_{t;0} = 1
        let (ctx, table, _, fam) = setup("A1^N", 1, &["1"], rat(1, 2), 20);
        let span = HermiteSpan::single(rat(1, 2), smallvec![0]);
        let img = transform_a(&ctx, &table, &fam, &span).unwrap();
        for z in [
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, 0.6),
        ] {
            let v = img.eval(&[z]);
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-10, "z={z} v={v}");
        }
    }

    #[test]
    fn transform_a_maps_hermite_to_phi() {
        let t = Rat::one();
        let (ctx, table, _, fam) = setup("A1^N", 1, &["1"], t.clone(), 24);
        for nu_deg in 1..=3usize {
            let nu: Exp = smallvec![nu_deg as u16];
            let span = HermiteSpan::single(t.clone(), nu.clone());
            let img = transform_a(&ctx, &table, &fam, &span).unwrap();
            for re in [0.2, -0.4, 0.6] {
                let z = [Complex64::new(re, 0.15)];
                let got = img.eval(&z);
                let expect = fam.phi_t_eval(&nu, &z).unwrap();
                assert!(
                    (got - expect).norm() < 1e-9,
                    "nu={nu_deg} z={z:?} got={got} expect={expect}"
                );
            }
        }
    }

    #[test]
    fn transform_a_linearity() {
        let t = Rat::one();
        let (ctx, table, _, fam) = setup("A1^N", 1, &["1/2"], t.clone(), 16);
        let span = HermiteSpan {
            t: t.clone(),
            terms: vec![
                (smallvec![1], Complex64::new(0.5, -1.0)),
                (smallvec![2], Complex64::new(-2.0, 0.25)),
            ],
        };
        let img = transform_a(&ctx, &table, &fam, &span).unwrap();
        let img1 =
            transform_a(&ctx, &table, &fam, &HermiteSpan::single(t.clone(), smallvec![1])).unwrap();
        let img2 =
            transform_a(&ctx, &table, &fam, &HermiteSpan::single(t.clone(), smallvec![2])).unwrap();
        let z = [Complex64::new(0.4, -0.2)];
        let direct = img.eval(&z);
        let combined =
            Complex64::new(0.5, -1.0) * img1.eval(&z) + Complex64::new(-2.0, 0.25) * img2.eval(&z);
        assert!((direct - combined).norm() < 1e-12);
    }

    #[test]
    fn truncation_guard() {
        let (ctx, table, _, fam) = setup("A1^N", 1, &["1"], Rat::one(), 6);
        let span = HermiteSpan::single(Rat::one(), smallvec![4]);
        let err = transform_a(&ctx, &table, &fam, &span).unwrap_err();
        assert!(matches!(err, DunklError::TruncationTooLow { required: 8, .. }));
    }

    #[test]
    fn transform_b_paths_agree() {
        let t = rat(1, 2);
        let (ctx, table, _, fam) = setup("A1^N", 1, &["1"], t.clone(), 20);
        for nu_deg in 0..=2usize {
            let span = HermiteSpan::single(t.clone(), smallvec![nu_deg as u16]);
            let direct = transform_b(&ctx, &table, &fam, &span, BPath::DirectKernel).unwrap();
            let via = transform_b(&ctx, &table, &fam, &span, BPath::ViaGroundState).unwrap();
            for re in [0.1, -0.3, 0.5] {
                let z = [Complex64::new(re, 0.2)];
                assert!(
                    (direct.eval(&z) - via.eval(&z)).norm() < 1e-10,
                    "nu={nu_deg}"
                );
            }
        }
    }

    #[test]
    fn transform_c_paths_agree_and_match_convolution() {
        let t = Rat::one();
        let (ctx, table, _, fam) = setup("A1^N", 1, &["1/2"], t.clone(), 22);
        let span = HermiteSpan::single(t.clone(), smallvec![2]);
        let kernel_path = transform_c(&ctx, &table, &fam, &span, CPath::Kernel).unwrap();
        let via_a = transform_c(&ctx, &table, &fam, &span, CPath::ViaA).unwrap();
        for re in [0.2, -0.5] {
            let z = [Complex64::new(re, 0.1)];
            assert!((kernel_path.eval(&z) - via_a.eval(&z)).norm() < 1e-10);
        }
        // real-point values equal the convolution route
        for x_num in [-2i64, 0, 1] {
            let x = [rat(x_num, 2)];
            let conv = convolve_heat(&ctx, &table, &fam, &span, &x).unwrap();
            let xf = [Complex64::new(rat_to_f64(&x[0]), 0.0)];
            let img_val = kernel_path.eval(&xf);
            assert!((conv - img_val.re).abs() < 1e-8, "x={x:?}");
        }
    }

    #[test]
    fn classical_convolution_oracle() {
        // μ≡0, N=1, t=1: (σ ∗ h_{1;0})(x) = √(2/3)·e^{-x²/6}
        let t = Rat::one();
        let (ctx, table, _, fam) = setup("A1^N", 1, &["0"], t.clone(), 30);
        let span = HermiteSpan::single(t.clone(), smallvec![0]);
        for x_num in [-1i64, 0, 2] {
            let x = [rat(x_num, 1)];
            let got = convolve_heat(&ctx, &table, &fam, &span, &x).unwrap();
            let xf = x_num as f64;
            let expect = (2.0f64 / 3.0).sqrt() * (-xf * xf / 6.0).exp();
            assert!((got - expect).abs() < 1e-10, "x={xf} got={got} expect={expect}");
        }
    }

    #[test]
    fn translation_reduces_to_shift_classically() {
        let t = rat(1, 2);
        let (ctx, table, _, _) = setup("A1^N", 1, &["0"], t.clone(), 30);
        for (xn, qn) in [(1i64, 1i64), (-1, 2), (0, 1)] {
            let x = [rat(xn, 2)];
            let q = [rat(qn, 2)];
            let got = translate_heat(&ctx, &table, &t, &x, &q).unwrap();
            let diff = (qn as f64 - xn as f64) / 2.0;
            let expect = (-diff * diff / (2.0 * 0.5)).exp();
            assert!((got - expect).abs() < 1e-10, "x={xn} q={qn} got={got}");
        }
        // x = 0 → σ_{μ,t}(q), any μ
        let (ctx1, table1, _, _) = setup("A1^N", 1, &["1"], t.clone(), 24);
        let q = [rat(3, 4)];
        let got = translate_heat(&ctx1, &table1, &t, &[Rat::zero()], &q).unwrap();
        let expect = (-0.75f64 * 0.75 / (2.0 * 0.5)).exp();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn fourier_gaussian_fixed_point() {
        let t = rat(1, 2);
        let (ctx, table, _, _) = setup("A1^N", 1, &["1"], t.clone(), 30);
        for kn in [0i64, 1, -2] {
            let k = [rat(kn, 2)];
            let got = dunkl_fourier_gaussian(&ctx, &table, &t, &k).unwrap();
            let kf = kn as f64 / 2.0;
            let expect = (-kf * kf / (2.0 * 0.5)).exp();
            assert!(
                (got - Complex64::new(expect, 0.0)).norm() < 1e-10,
                "k={kf} got={got}"
            );
        }
    }

    #[test]
    fn classical_fourier_gaussian() {
        let t = Rat::one();
        let (ctx, table, _, _) = setup("A1^N", 1, &["0"], t.clone(), 24);
        let k = [rat(3, 4)];
        let got = dunkl_fourier_gaussian(&ctx, &table, &t, &k).unwrap();
        let expect = (-0.75f64 * 0.75 / 2.0).exp();
        assert!((got - Complex64::new(expect, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn ground_state_norm_preservation() {
        // ‖V⁻¹φ‖_{L²(ω)} = ‖φ‖_{L²(m)}: both reduce to the same exact moment
        let t = rat(1, 2);
        let (ctx, _, _, fam) = setup("A1^N", 1, &["1"], t.clone(), 12);
        let coeffs: Vec<(Exp, Rat)> = vec![(smallvec![0], rat(1, 3)), (smallvec![2], rat(-2, 1))];
        let (core_omega, scale_omega) = span_omega_norm_exact(&ctx, &fam, &coeffs, &t).unwrap();
        let mut expected = Rat::zero();
        for (nu, c) in &coeffs {
            expected += c * c * fam.norm_sq(nu).unwrap();
        }
        assert_eq!(core_omega, expected);
        assert!((scale_omega.to_f64() - 1.0).abs() < 1e-15);
        // V∘V⁻¹ = identity on spans
        let span = HermiteSpan::single(t, smallvec![1]);
        let round =
            ground_state_span(GroundStateDirection::Forward, &ground_state_span(GroundStateDirection::Inverse, &span));
        assert_eq!(round.terms.len(), span.terms.len());
    }

    #[test]
    fn bspace_reproducing_property() {
        // ⟨⟨𝕂_z-truncation, p⟩⟩_t = p(z) for deg ≤ 4 polynomials
        let t = rat(1, 2);
        let (_ctx, table, basis, _) = setup("A1^N", 1, &["1"], t.clone(), 16);
        let z = Complex64::new(0.35, -0.4);
        // 𝕂_z(w) = Σ t^{-n} E_n(z*, w): a polynomial in w with z conjugated
        let mut kz = CPoly::zero(1);
        let mut t_pow = 1.0f64;
        for n in 0..=table.degree {
            if n > 0 {
                t_pow /= rat_to_f64(&t);
            }
            for (a, e_a) in table.split_by_x(n).unwrap().iter() {
                let z_pow = z.conj().powu(a[0] as u32);
                kz = kz.add(&e_a.to_complex().scale(&(z_pow * t_pow)));
            }
        }
        for p_spec in [vec![(0u16, 1.0)], vec![(3, 2.0), (1, -0.5)], vec![(4, 1.0)]] {
            let mut p = CPoly::zero(1);
            for (k, c) in &p_spec {
                p.insert_add(smallvec![*k], Complex64::new(*c, 0.0));
            }
            let ip = bspace_inner(
                &basis,
                &t,
                &BSpaceElement::Poly(&kz),
                &BSpaceElement::Poly(&p),
                16,
            )
            .unwrap();
            let direct = p.eval(&[z]);
            assert!(
                (ip - direct).norm() < 1e-8,
                "p={p_spec:?} ip={ip} direct={direct}"
            );
        }
        // positivity of ⟨⟨p, p⟩⟩
        let mut p = CPoly::zero(1);
        p.insert_add(smallvec![2], Complex64::new(1.0, 0.5));
        p.insert_add(smallvec![0], Complex64::new(-0.3, 0.0));
        let pp = bspace_inner(&basis, &t, &BSpaceElement::Poly(&p), &BSpaceElement::Poly(&p), 16)
            .unwrap();
        assert!(pp.re > 0.0 && pp.im.abs() < 1e-12);
    }

    #[test]
    fn bspace_phi_orthonormality() {
        let t = rat(2, 1);
        let (_, _, basis, fam) = setup("A1^N", 1, &["1/2"], t.clone(), 12);
        for a in 0..=3u16 {
            for b in 0..=3u16 {
                let pa = basis.q_poly(&smallvec![a]).unwrap().to_complex();
                let pb = basis.q_poly(&smallvec![b]).unwrap().to_complex();
                let scale_a = fam.norm_scale_f64(&smallvec![a]).unwrap();
                let scale_b = fam.norm_scale_f64(&smallvec![b]).unwrap();
                let ip = bspace_inner(
                    &basis,
                    &t,
                    &BSpaceElement::Poly(&pa.scale(&Complex64::new(scale_a, 0.0))),
                    &BSpaceElement::Poly(&pb.scale(&Complex64::new(scale_b, 0.0))),
                    12,
                )
                .unwrap();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (ip - Complex64::new(expect, 0.0)).norm() < 1e-12,
                    "a={a} b={b} ip={ip}"
                );
            }
        }
    }

    #[test]
    fn parseval_on_spans() {
        let t = Rat::one();
        let (ctx, table, basis, fam) = setup("A1^N", 1, &["1"], t.clone(), 24);
        let span = HermiteSpan {
            t: t.clone(),
            terms: vec![
                (smallvec![0], Complex64::new(0.7, 0.0)),
                (smallvec![1], Complex64::new(-0.2, 0.5)),
                (smallvec![3], Complex64::new(0.1, -0.1)),
            ],
        };
        let img = transform_a(&ctx, &table, &fam, &span).unwrap();
        let lhs = bspace_inner(
            &basis,
            &t,
            &BSpaceElement::Image(&img),
            &BSpaceElement::Image(&img),
            24,
        )
        .unwrap();
        let rhs: f64 = span.terms.iter().map(|(_, c)| c.norm_sqr()).sum();
        assert!((lhs.re - rhs).abs() < 1e-6, "lhs={lhs} rhs={rhs}");
        assert!(lhs.im.abs() < 1e-10);
    }

    #[test]
    fn cspace_unitarity_bookkeeping() {
        let t = Rat::one();
        let (ctx, table, basis, fam) = setup("A1^N", 1, &["1/2"], t.clone(), 24);
        let span = HermiteSpan::single(t.clone(), smallvec![1]);
        let img = transform_c(&ctx, &table, &fam, &span, CPath::Kernel).unwrap();
        let ip = cspace_inner(&ctx, &basis, &t, &img, &img, 24).unwrap();
        // ‖h_{t;ν}‖²_{L²(ω_t)} = 1
        assert!((ip.re - 1.0).abs() < 1e-6, "ip={ip}");
        // exact measure-scale relation: the ω_{t/2} and ω_t norms of the same
        // span differ by exactly 2^{γ+N/2}
        let coeffs: Vec<(Exp, Rat)> = vec![(smallvec![1], Rat::one())];
        let (c1, s1) =
            span_omega_norm_exact(&ctx, &fam, &coeffs, &(t.clone() / rat(2, 1))).unwrap();
        let (c2, s2) = span_omega_norm_exact(&ctx, &fam, &coeffs, &t).unwrap();
        assert_eq!(c1, c2);
        let lhs = s1.to_exact().unwrap();
        // 2^{γ+N/2} = 2^1 here (γ = 1/2, N/2 = 1/2)
        let rhs = s2
            .to_exact()
            .unwrap()
            .mul(&crate::scalar::SqrtScalar::from_rat(rat(2, 1)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn expand_image_degree_guard() {
        let img = HolomorphicImage {
            envelope_t: Rat::one(),
            poly: {
                let mut p = CPoly::zero(1);
                p.insert_add(smallvec![5], Complex64::new(1.0, 0.0));
                p
            },
            truncation_degree: 5,
            source_degree: 5,
        };
        assert!(matches!(
            expand_image(&img, 4),
            Err(DunklError::DegreeOverflow { required: 5, cap: 4 })
        ));
    }
}
