//! Root systems, finite reflection groups, multiplicity functions, and the
//! reflection-invariant weight with its Macdonald–Mehta–Selberg constant.
//!
//! Roots are kept as a rational direction vector plus a scale making the
//! squared norm exactly 2, so crystallographic families (A₁^N, A, B, D) have
//! rational reflection matrices and the whole downstream operator calculus
//! stays in exact arithmetic. Dihedral I₂(m) systems with irrational
//! coordinates fall back to a floating regime.

use crate::error::{DunklError, Result};
use crate::quadrature;
use crate::scalar::{rat, rat_int, rat_to_f64, Rat};
use num::{One, Signed, Zero};
use serde::Deserialize;
use statrs::function::gamma::gamma as gamma_fn;
use std::collections::VecDeque;

pub const GROUP_CLOSURE_CAP: usize = 1_000_000;
const FLOAT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Exact,
    Floating,
}

/// A single root α = scale · dir with ‖α‖² = 2.
#[derive(Clone, Debug)]
pub struct Root {
    /// Rational direction (exact regime only).
    pub dir_rat: Option<Vec<Rat>>,
    pub dir_f64: Vec<f64>,
    /// scale² = 2 / ⟨dir, dir⟩ (exact regime only).
    pub scale_sq_rat: Option<Rat>,
    pub scale_f64: f64,
}

impl Root {
    fn from_rat_dir(dir: Vec<Rat>) -> Result<Self> {
        let norm_sq: Rat = dir.iter().map(|c| c * c).sum();
        if norm_sq.is_zero() {
            return Err(DunklError::InvalidRoot("zero vector".into()));
        }
        let scale_sq = rat_int(2) / norm_sq;
        let dir_f64: Vec<f64> = dir.iter().map(rat_to_f64).collect();
        let scale_f64 = rat_to_f64(&scale_sq).sqrt();
        Ok(Root {
            dir_rat: Some(dir),
            dir_f64,
            scale_sq_rat: Some(scale_sq),
            scale_f64,
        })
    }

    fn from_f64_dir(dir: Vec<f64>) -> Result<Self> {
        let norm_sq: f64 = dir.iter().map(|c| c * c).sum();
        if norm_sq == 0.0 {
            return Err(DunklError::InvalidRoot("zero vector".into()));
        }
        let scale_f64 = (2.0 / norm_sq).sqrt();
        Ok(Root {
            dir_rat: None,
            dir_f64: dir,
            scale_sq_rat: None,
            scale_f64,
        })
    }

    /// The root vector itself, as floats.
    pub fn vector_f64(&self) -> Vec<f64> {
        self.dir_f64.iter().map(|c| c * self.scale_f64).collect()
    }
}

#[derive(Clone, Debug)]
pub struct RootSystem {
    pub dim: usize,
    pub roots: Vec<Root>,
    pub regime: Regime,
}

/// Descriptor accepted by the harness config.
#[derive(Clone, Debug, Deserialize)]
pub struct RootSystemSpec {
    pub family: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub roots: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub mu: Vec<String>,
}

fn dot_rat(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// σ_α(x) = x − (2⟨α,x⟩/‖α‖²)α for rational data. Only the direction of α
/// matters, so this is exact whenever the direction is rational.
pub fn reflect_rat(alpha: &[Rat], x: &[Rat]) -> Result<Vec<Rat>> {
    let norm_sq = dot_rat(alpha, alpha);
    if norm_sq.is_zero() {
        return Err(DunklError::InvalidRoot("cannot reflect across zero vector".into()));
    }
    let factor = rat_int(2) * dot_rat(alpha, x) / norm_sq;
    Ok(x.iter()
        .zip(alpha)
        .map(|(xi, ai)| xi - &factor * ai)
        .collect())
}

pub fn reflect_f64(alpha: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let norm_sq = dot_f64(alpha, alpha);
    if norm_sq == 0.0 {
        return Err(DunklError::InvalidRoot("cannot reflect across zero vector".into()));
    }
    let factor = 2.0 * dot_f64(alpha, x) / norm_sq;
    Ok(x.iter().zip(alpha).map(|(xi, ai)| xi - factor * ai).collect())
}

/// Reflection matrix I − (2/⟨d,d⟩) d dᵀ.
pub fn reflection_matrix_rat(dir: &[Rat]) -> Vec<Vec<Rat>> {
    let n = dir.len();
    let norm_sq = dot_rat(dir, dir);
    let two_over = rat_int(2) / norm_sq;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let delta = if i == j { Rat::one() } else { Rat::zero() };
                    delta - &two_over * &dir[i] * &dir[j]
                })
                .collect()
        })
        .collect()
}

pub fn reflection_matrix_f64(dir: &[f64]) -> Vec<Vec<f64>> {
    let n = dir.len();
    let norm_sq = dot_f64(dir, dir);
    let two_over = 2.0 / norm_sq;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    delta - two_over * dir[i] * dir[j]
                })
                .collect()
        })
        .collect()
}

fn mat_mul_rat(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

fn mat_mul_f64(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

fn mat_vec_rat(m: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    m.iter().map(|row| dot_rat(row, v)).collect()
}

fn mat_vec_f64(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot_f64(row, v)).collect()
}

fn det_rat(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut det = Rat::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero());
        let Some(p) = pivot else { return Rat::zero() };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        det *= a[col][col].clone();
        let inv = a[col][col].recip();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] * &inv;
            for c in col..n {
                let sub = &f * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    det
}

fn det_f64(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let p = (col..n)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
            .unwrap();
        if a[p][col].abs() < 1e-14 {
            return 0.0;
        }
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

impl RootSystem {
    pub fn is_exact(&self) -> bool {
        self.regime == Regime::Exact
    }

    pub fn n_roots(&self) -> usize {
        self.roots.len()
    }

    /// Index of the root equal to `matrix · roots[i]`, if present.
    fn image_index_rat(&self, matrix: &[Vec<Rat>], i: usize) -> Option<usize> {
        let dir = self.roots[i].dir_rat.as_ref()?;
        let scale_sq = self.roots[i].scale_sq_rat.as_ref()?;
        let image = mat_vec_rat(matrix, dir);
        self.find_root_rat(&image, scale_sq)
    }

    /// Find γ with scale_γ·dir_γ = scale·image (all exact).
    fn find_root_rat(&self, image_dir: &[Rat], scale_sq: &Rat) -> Option<usize> {
        'outer: for (j, root) in self.roots.iter().enumerate() {
            let dj = root.dir_rat.as_ref()?;
            let sj = root.scale_sq_rat.as_ref()?;
            let k = dj.iter().position(|c| !c.is_zero())?;
            if image_dir[k].is_zero() {
                continue;
            }
            let lambda = &image_dir[k] / &dj[k];
            if !lambda.is_positive() {
                continue;
            }
            for (a, b) in image_dir.iter().zip(dj) {
                if a != &(&lambda * b) {
                    continue 'outer;
                }
            }
            // full vectors match iff λ²·scale_sq == scale_sq_j
            if &(&lambda * &lambda) * scale_sq == *sj {
                return Some(j);
            }
        }
        None
    }

    fn image_index_f64(&self, matrix: &[Vec<f64>], i: usize) -> Option<usize> {
        let v = self.roots[i].vector_f64();
        let image = mat_vec_f64(matrix, &v);
        self.find_root_f64(&image)
    }

    fn find_root_f64(&self, image: &[f64]) -> Option<usize> {
        self.roots.iter().position(|root| {
            let w = root.vector_f64();
            w.iter()
                .zip(image)
                .all(|(a, b)| (a - b).abs() < FLOAT_TOL)
        })
    }
}

fn canonical_sort(roots: &mut [Root]) {
    roots.sort_by(|a, b| {
        // larger scale² (originally shorter roots) first, then direction lex
        let sa = a.scale_sq_rat.as_ref().map(rat_to_f64).unwrap_or(a.scale_f64 * a.scale_f64);
        let sb = b.scale_sq_rat.as_ref().map(rat_to_f64).unwrap_or(b.scale_f64 * b.scale_f64);
        sb.partial_cmp(&sa)
            .unwrap()
            .then_with(|| a.dir_f64.partial_cmp(&b.dir_f64).unwrap())
    });
}

/// Validate the root-system axioms and the norm convention.
fn validate(rs: &RootSystem) -> Result<()> {
    let fmt_vec_rat = |v: &[Rat]| {
        let parts: Vec<String> = v.iter().map(|c| c.to_string()).collect();
        format!("({})", parts.join(", "))
    };
    let fmt_vec_f64 = |v: &[f64]| {
        let parts: Vec<String> = v.iter().map(|c| format!("{c:.6}")).collect();
        format!("({})", parts.join(", "))
    };
    for root in &rs.roots {
        let norm_sq: f64 = root.vector_f64().iter().map(|c| c * c).sum();
        if (norm_sq - 2.0).abs() > 1e-12 {
            return Err(DunklError::InvalidRoot(format!(
                "root {} has squared norm {norm_sq}",
                fmt_vec_f64(&root.vector_f64())
            )));
        }
    }
    if rs.is_exact() {
        // Property 2 + duplicates: no root is a non-±1 multiple of another.
        for i in 0..rs.roots.len() {
            for j in 0..rs.roots.len() {
                if i == j {
                    continue;
                }
                let (di, dj) = (
                    rs.roots[i].dir_rat.as_ref().unwrap(),
                    rs.roots[j].dir_rat.as_ref().unwrap(),
                );
                let k = di.iter().position(|c| !c.is_zero()).unwrap();
                if dj[k].is_zero() {
                    continue;
                }
                let lambda = &di[k] / &dj[k];
                if di.iter().zip(dj).all(|(a, b)| a == &(&lambda * b)) {
                    // parallel directions: full vectors must be negatives
                    let si = rs.roots[i].scale_sq_rat.as_ref().unwrap();
                    let sj = rs.roots[j].scale_sq_rat.as_ref().unwrap();
                    let ratio_sq = &(&lambda * &lambda) * sj / si;
                    if !(ratio_sq.is_one() && lambda.is_negative()) {
                        return Err(DunklError::InvalidRoot(format!(
                            "roots {} and {} are parallel but not negatives",
                            fmt_vec_rat(di),
                            fmt_vec_rat(dj)
                        )));
                    }
                }
            }
        }
        // Properties 1 and 3: closure under every σ_α (negation is σ_α(α)).
        for i in 0..rs.roots.len() {
            let m = reflection_matrix_rat(rs.roots[i].dir_rat.as_ref().unwrap());
            for j in 0..rs.roots.len() {
                if rs.image_index_rat(&m, j).is_none() {
                    let image = mat_vec_rat(&m, rs.roots[j].dir_rat.as_ref().unwrap());
                    return Err(DunklError::NotARootSystem {
                        alpha: fmt_vec_rat(rs.roots[i].dir_rat.as_ref().unwrap()),
                        beta: fmt_vec_rat(rs.roots[j].dir_rat.as_ref().unwrap()),
                        image: fmt_vec_rat(&image),
                    });
                }
            }
        }
    } else {
        for i in 0..rs.roots.len() {
            let m = reflection_matrix_f64(&rs.roots[i].dir_f64);
            for j in 0..rs.roots.len() {
                if rs.image_index_f64(&m, j).is_none() {
                    let image = mat_vec_f64(&m, &rs.roots[j].vector_f64());
                    return Err(DunklError::NotARootSystem {
                        alpha: fmt_vec_f64(&rs.roots[i].vector_f64()),
                        beta: fmt_vec_f64(&rs.roots[j].vector_f64()),
                        image: fmt_vec_f64(&image),
                    });
                }
            }
        }
    }
    Ok(())
}

fn unit(dim: usize, i: usize, sign: i64) -> Vec<Rat> {
    let mut v = vec![Rat::zero(); dim];
    v[i] = rat_int(sign);
    v
}

/// Build one of the built-in families or an explicit list, normalized to
/// squared norm 2 and fully validated.
pub fn build_root_system(spec: &RootSystemSpec) -> Result<RootSystem> {
    let n = spec.n;
    if n == 0 {
        return Err(DunklError::Config("dimension N must be positive".into()));
    }
    let mut roots: Vec<Root> = Vec::new();
    let mut regime = Regime::Exact;
    match spec.family.as_str() {
        "A1^N" => {
            for i in 0..n {
                roots.push(Root::from_rat_dir(unit(n, i, 1))?);
                roots.push(Root::from_rat_dir(unit(n, i, -1))?);
            }
        }
        "A" => {
            // A_{N−1} realized in N coordinates: e_i − e_j, i ≠ j
            if n < 2 {
                return Err(DunklError::Config("family A needs N >= 2".into()));
            }
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let mut v = vec![Rat::zero(); n];
                        v[i] = Rat::one();
                        v[j] = -Rat::one();
                        roots.push(Root::from_rat_dir(v)?);
                    }
                }
            }
        }
        "B" => {
            if n < 2 {
                return Err(DunklError::Config("family B needs N >= 2".into()));
            }
            for i in 0..n {
                roots.push(Root::from_rat_dir(unit(n, i, 1))?);
                roots.push(Root::from_rat_dir(unit(n, i, -1))?);
            }
            for i in 0..n {
                for j in i + 1..n {
                    for (si, sj) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                        let mut v = vec![Rat::zero(); n];
                        v[i] = rat_int(si);
                        v[j] = rat_int(sj);
                        roots.push(Root::from_rat_dir(v)?);
                    }
                }
            }
        }
        "D" => {
            if n < 2 {
                return Err(DunklError::Config("family D needs N >= 2".into()));
            }
            for i in 0..n {
                for j in i + 1..n {
                    for (si, sj) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                        let mut v = vec![Rat::zero(); n];
                        v[i] = rat_int(si);
                        v[j] = rat_int(sj);
                        roots.push(Root::from_rat_dir(v)?);
                    }
                }
            }
        }
        "I2" => {
            if n != 2 {
                return Err(DunklError::Config("family I2 needs N = 2".into()));
            }
            let m = spec.m.ok_or_else(|| DunklError::Config("family I2 needs m".into()))?;
            if m < 2 {
                return Err(DunklError::Config("I2(m) needs m >= 2".into()));
            }
            match m {
                2 => {
                    for i in 0..2 {
                        roots.push(Root::from_rat_dir(unit(2, i, 1))?);
                        roots.push(Root::from_rat_dir(unit(2, i, -1))?);
                    }
                }
                4 => {
                    // rational realization: the B₂ direction set
                    for i in 0..2 {
                        roots.push(Root::from_rat_dir(unit(2, i, 1))?);
                        roots.push(Root::from_rat_dir(unit(2, i, -1))?);
                    }
                    for (si, sj) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                        roots.push(Root::from_rat_dir(vec![rat_int(si), rat_int(sj)])?);
                    }
                }
                _ => {
                    regime = Regime::Floating;
                    for k in 0..2 * m {
                        let theta = std::f64::consts::PI * k as f64 / m as f64;
                        roots.push(Root::from_f64_dir(vec![theta.cos(), theta.sin()])?);
                    }
                }
            }
        }
        "explicit" => {
            let list = spec
                .roots
                .as_ref()
                .ok_or_else(|| DunklError::Config("explicit family needs roots".into()))?;
            for v in list {
                if v.len() != n {
                    return Err(DunklError::Config("root length does not match N".into()));
                }
                let dir: Result<Vec<Rat>> =
                    v.iter().map(|s| crate::scalar::parse_rational(s)).collect();
                roots.push(Root::from_rat_dir(dir?)?);
            }
        }
        other => {
            return Err(DunklError::Config(format!("unknown family {other:?}")));
        }
    }
    canonical_sort(&mut roots);
    let rs = RootSystem {
        dim: n,
        roots,
        regime,
    };
    validate(&rs)?;
    Ok(rs)
}

/// The empty root system (trivial group) in dimension `n`.
pub fn empty_root_system(n: usize) -> RootSystem {
    RootSystem {
        dim: n,
        roots: Vec::new(),
        regime: Regime::Exact,
    }
}

#[derive(Clone, Debug)]
pub struct GroupElement {
    pub matrix_rat: Option<Vec<Vec<Rat>>>,
    pub matrix_f64: Vec<Vec<f64>>,
    /// Action on the root list: root i maps to root perm[i]. This action is
    /// faithful, so it doubles as the dedup key during closure.
    pub root_perm: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ReflectionGroup {
    pub elements: Vec<GroupElement>,
    /// Indices into `elements` of the generating reflections.
    pub generators: Vec<usize>,
    /// Number of (g, h) pairs whose product was verified to lie in the set.
    pub closure_pairs_checked: usize,
}

impl ReflectionGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

fn identity_rat(n: usize) -> Vec<Vec<Rat>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                .collect()
        })
        .collect()
}

fn identity_f64(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn perm_of_matrix(rs: &RootSystem, mr: Option<&Vec<Vec<Rat>>>, mf: &[Vec<f64>]) -> Result<Vec<usize>> {
    (0..rs.n_roots())
        .map(|i| {
            let img = if let Some(m) = mr {
                rs.image_index_rat(m, i)
            } else {
                rs.image_index_f64(mf, i)
            };
            img.ok_or_else(|| {
                DunklError::InternalConsistency(format!(
                    "group element does not permute the root list (root {i})"
                ))
            })
        })
        .collect()
}

/// Closure of the generating reflections under multiplication (breadth-first,
/// deduplicated by the faithful action on roots).
pub fn generate_group(rs: &RootSystem) -> Result<ReflectionGroup> {
    generate_group_capped(rs, GROUP_CLOSURE_CAP)
}

pub fn generate_group_capped(rs: &RootSystem, cap: usize) -> Result<ReflectionGroup> {
    let n = rs.dim;
    let exact = rs.is_exact();

    // one generator per root direction (α and −α give the same reflection)
    let mut gens: Vec<GroupElement> = Vec::new();
    for root in &rs.roots {
        let (mr, mf) = if exact {
            let m = reflection_matrix_rat(root.dir_rat.as_ref().unwrap());
            let f = m
                .iter()
                .map(|row| row.iter().map(rat_to_f64).collect())
                .collect();
            (Some(m), f)
        } else {
            (None, reflection_matrix_f64(&root.dir_f64))
        };
        let perm = perm_of_matrix(rs, mr.as_ref(), &mf)?;
        if gens.iter().any(|g| g.root_perm == perm) {
            continue;
        }
        // every generating reflection has determinant −1
        let det_ok = if let Some(m) = &mr {
            det_rat(m) == -Rat::one()
        } else {
            (det_f64(&mf) + 1.0).abs() < 1e-9
        };
        if !det_ok {
            return Err(DunklError::InternalConsistency(
                "generator determinant is not -1".into(),
            ));
        }
        gens.push(GroupElement {
            matrix_rat: mr,
            matrix_f64: mf,
            root_perm: perm,
        });
    }

    let id = GroupElement {
        matrix_rat: if exact { Some(identity_rat(n)) } else { None },
        matrix_f64: identity_f64(n),
        root_perm: (0..rs.n_roots()).collect(),
    };

    let mut elements: Vec<GroupElement> = vec![id];
    let mut seen: std::collections::HashSet<Vec<usize>> =
        std::collections::HashSet::from([elements[0].root_perm.clone()]);
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    let mut generator_indices = Vec::new();

    while let Some(idx) = queue.pop_front() {
        for gen in &gens {
            // compose: (gen ∘ current) acting on roots
            let cur = &elements[idx];
            let perm: Vec<usize> = cur.root_perm.iter().map(|&i| gen.root_perm[i]).collect();
            if seen.contains(&perm) {
                continue;
            }
            if elements.len() >= cap {
                return Err(DunklError::RunawayClosure { cap });
            }
            let matrix_rat = cur
                .matrix_rat
                .as_ref()
                .map(|m| mat_mul_rat(gen.matrix_rat.as_ref().unwrap(), m));
            let matrix_f64 = mat_mul_f64(&gen.matrix_f64, &cur.matrix_f64);
            seen.insert(perm.clone());
            elements.push(GroupElement {
                matrix_rat,
                matrix_f64,
                root_perm: perm,
            });
            queue.push_back(elements.len() - 1);
        }
    }

    // locate the generators inside the element list
    for gen in &gens {
        let pos = elements
            .iter()
            .position(|e| e.root_perm == gen.root_perm)
            .expect("generator must appear in closure");
        generator_indices.push(pos);
    }

    // multiplication-closure witness
    let mut pairs = 0usize;
    if elements.len() <= 2048 {
        for g in &elements {
            for h in &elements {
                let perm: Vec<usize> = h.root_perm.iter().map(|&i| g.root_perm[i]).collect();
                if !seen.contains(&perm) {
                    return Err(DunklError::InternalConsistency(
                        "closure check failed: product escapes the set".into(),
                    ));
                }
                pairs += 1;
            }
        }
    }

    Ok(ReflectionGroup {
        elements,
        generators: generator_indices,
        closure_pairs_checked: pairs,
    })
}

/// Partition the root list into G-orbits. Orbit order follows the first
/// (canonically sorted) root they contain, which puts the short-root orbit
/// first for family B.
pub fn orbit_partition(rs: &RootSystem, group: &ReflectionGroup) -> Result<Vec<Vec<usize>>> {
    let mut orbit_of = vec![usize::MAX; rs.n_roots()];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for start in 0..rs.n_roots() {
        if orbit_of[start] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut members = Vec::new();
        let mut queue = VecDeque::from([start]);
        orbit_of[start] = id;
        while let Some(i) = queue.pop_front() {
            members.push(i);
            for &g in &group.generators {
                let j = group.elements[g].root_perm[i];
                if orbit_of[j] == usize::MAX {
                    orbit_of[j] = id;
                    queue.push_back(j);
                }
            }
        }
        members.sort_unstable();
        orbits.push(members);
    }
    // each orbit is closed under negation (σ_α(α) = −α)
    for orbit in &orbits {
        for &i in orbit {
            let neg: Vec<f64> = rs.roots[i].vector_f64().iter().map(|c| -c).collect();
            let j = rs
                .find_root_f64(&neg)
                .ok_or_else(|| DunklError::InternalConsistency("missing negated root".into()))?;
            if !orbit.contains(&j) {
                return Err(DunklError::InternalConsistency(
                    "orbit not closed under negation".into(),
                ));
            }
        }
    }
    Ok(orbits)
}

/// Orbit-wise nonnegative multiplicity values with the derived half-sum γ_μ.
#[derive(Clone, Debug)]
pub struct MultiplicityFunction {
    pub orbit_values: Vec<Rat>,
    pub orbit_of_root: Vec<usize>,
    pub gamma: Rat,
}

impl MultiplicityFunction {
    pub fn mu_of_root(&self, i: usize) -> &Rat {
        &self.orbit_values[self.orbit_of_root[i]]
    }

    pub fn is_zero(&self) -> bool {
        self.orbit_values.iter().all(|v| v.is_zero())
    }

    pub fn zero_like(&self) -> MultiplicityFunction {
        MultiplicityFunction {
            orbit_values: vec![Rat::zero(); self.orbit_values.len()],
            orbit_of_root: self.orbit_of_root.clone(),
            gamma: Rat::zero(),
        }
    }
}

/// One value per orbit; all values must be ≥ 0 (complex or negative
/// multiplicities are rejected).
pub fn make_multiplicity(
    orbits: &[Vec<usize>],
    n_roots: usize,
    values: &[Rat],
) -> Result<MultiplicityFunction> {
    if values.len() != orbits.len() {
        return Err(DunklError::Config(format!(
            "expected {} multiplicity values (one per orbit), got {}",
            orbits.len(),
            values.len()
        )));
    }
    for v in values {
        if v.is_negative() {
            return Err(DunklError::UnsupportedMultiplicity(format!(
                "negative value {v}"
            )));
        }
    }
    let mut orbit_of_root = vec![usize::MAX; n_roots];
    for (id, orbit) in orbits.iter().enumerate() {
        for &i in orbit {
            orbit_of_root[i] = id;
        }
    }
    if orbit_of_root.iter().any(|&o| o == usize::MAX) {
        return Err(DunklError::Config("orbit partition does not cover all roots".into()));
    }
    let total: Rat = orbit_of_root.iter().map(|&o| values[o].clone()).sum();
    let gamma = total / rat_int(2);
    Ok(MultiplicityFunction {
        orbit_values: values.to_vec(),
        orbit_of_root,
        gamma,
    })
}

/// Normalized weight data: the Macdonald–Mehta–Selberg constant c_μ, the time
/// parameter t, and the cached exponent γ_μ + N/2.
#[derive(Clone, Debug)]
pub struct WeightSpec {
    pub c_mu: f64,
    pub t: Rat,
    pub exponent: Rat,
}

impl WeightSpec {
    pub fn new(mu: &MultiplicityFunction, rs: &RootSystem, t: Rat, rel_tol: f64) -> Result<Self> {
        if !t.is_positive() {
            return Err(DunklError::InvalidParameter("t must be > 0".into()));
        }
        let c_mu = mms_constant(mu, rs, rel_tol)?;
        let exponent = &mu.gamma + rat(rs.dim as i64, 2);
        Ok(WeightSpec { c_mu, t, exponent })
    }
}

/// The unnormalized weight Π_{α∈𝓡} |⟨α,x⟩|^{μ(α)} (no t factor, no c_μ).
pub fn weight_product(mu: &MultiplicityFunction, rs: &RootSystem, x: &[f64]) -> f64 {
    let mut w = 1.0;
    for (i, root) in rs.roots.iter().enumerate() {
        let m = rat_to_f64(mu.mu_of_root(i));
        if m == 0.0 {
            continue;
        }
        let inner = root.scale_f64 * dot_f64(&root.dir_f64, x);
        w *= inner.abs().powf(m);
    }
    w
}

/// ω_{μ,t}(x) = c_μ^{-1} t^{-(γ_μ+N/2)} Π_{α∈𝓡} |⟨α,x⟩|^{μ(α)}.
pub fn weight_eval(
    ws: &WeightSpec,
    mu: &MultiplicityFunction,
    rs: &RootSystem,
    x: &[f64],
) -> Result<f64> {
    if !ws.t.is_positive() {
        return Err(DunklError::InvalidParameter("t must be > 0".into()));
    }
    let t = rat_to_f64(&ws.t);
    let exp = rat_to_f64(&ws.exponent);
    Ok(weight_product(mu, rs, x) * t.powf(-exp) / ws.c_mu)
}

/// True when every root direction lies on a coordinate axis, so the weight
/// integral factorizes into 1-D pieces.
fn product_axes(mu: &MultiplicityFunction, rs: &RootSystem) -> Option<Vec<(f64, f64)>> {
    // per axis: (exponent e_i, scale factor s_i) so the axis weight is s_i·|x|^{e_i}
    let mut axes = vec![(0.0f64, 1.0f64); rs.dim];
    for (idx, root) in rs.roots.iter().enumerate() {
        let nonzero: Vec<usize> = root
            .dir_f64
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > 1e-15)
            .map(|(i, _)| i)
            .collect();
        if nonzero.len() != 1 {
            return None;
        }
        let axis = nonzero[0];
        let m = rat_to_f64(mu.mu_of_root(idx));
        let coeff = (root.scale_f64 * root.dir_f64[axis]).abs();
        axes[axis].0 += m;
        axes[axis].1 *= coeff.powf(m);
    }
    Some(axes)
}

/// c_μ = ∫ dω̃_{μ,1}(x) e^{-x²/2}: tensorized 1-D quadrature for product-type
/// systems, radial × adaptive circle quadrature for N = 2, iterated adaptive
/// quadrature otherwise. Relative error target `rel_tol`.
pub fn mms_constant(mu: &MultiplicityFunction, rs: &RootSystem, rel_tol: f64) -> Result<f64> {
    let n = rs.dim;
    if rs.roots.is_empty() || mu.is_zero() {
        return Ok((2.0 * std::f64::consts::PI).powf(n as f64 / 2.0));
    }
    if let Some(axes) = product_axes(mu, rs) {
        let mut c = 1.0;
        for (e, s) in axes {
            let mut f = |x: f64| x.abs().powf(e) * (-x * x / 2.0).exp();
            let (v, err) = quadrature::adaptive_with_splits(&mut f, -14.0, 14.0, &[0.0], 1e-13);
            if err > rel_tol * v {
                return Err(DunklError::PrecisionFailure {
                    achieved: err / v,
                    requested: rel_tol,
                    partial: Some((s * v * c, 0.0)),
                });
            }
            c *= s * v;
        }
        return Ok(c);
    }
    if n == 2 {
        // weight is homogeneous of degree 2γ: radial part in closed form,
        // angle integrated adaptively with splits at the root normals
        let gamma = rat_to_f64(&mu.gamma);
        let radial = 2f64.powf(gamma) * gamma_fn(gamma + 1.0);
        let mut splits = Vec::new();
        for root in &rs.roots {
            let theta = root.dir_f64[1].atan2(root.dir_f64[0]) + std::f64::consts::FRAC_PI_2;
            let mut t = theta.rem_euclid(std::f64::consts::PI);
            splits.push(t);
            t += std::f64::consts::PI;
            splits.push(t);
        }
        let mut f = |theta: f64| weight_product(mu, rs, &[theta.cos(), theta.sin()]);
        let (angular, err) = quadrature::adaptive_with_splits(
            &mut f,
            0.0,
            2.0 * std::f64::consts::PI,
            &splits,
            1e-13,
        );
        let c = radial * angular;
        if radial * err > rel_tol * c.abs() {
            return Err(DunklError::PrecisionFailure {
                achieved: radial * err / c.abs(),
                requested: rel_tol,
                partial: Some((c, 0.0)),
            });
        }
        return Ok(c);
    }
    // general case: iterated adaptive quadrature with kink splits per level
    let val = iterated_integral(mu, rs, &mut vec![0.0; n], 0, rel_tol)?;
    Ok(val)
}

fn iterated_integral(
    mu: &MultiplicityFunction,
    rs: &RootSystem,
    x: &mut Vec<f64>,
    level: usize,
    rel_tol: f64,
) -> Result<f64> {
    let n = rs.dim;
    let bound = 12.0;
    // kink locations for x[level] given x[0..level] fixed and inner vars at
    // arbitrary values: only roots supported on coordinates ≤ level matter
    let mut splits = Vec::new();
    for root in &rs.roots {
        let d = &root.dir_f64;
        if d[level].abs() < 1e-15 {
            continue;
        }
        if d[level + 1..].iter().any(|c| c.abs() > 1e-15) {
            continue;
        }
        let s: f64 = (0..level).map(|j| d[j] * x[j]).sum();
        splits.push(-s / d[level]);
    }
    let tol = rel_tol.max(1e-10) * 0.5f64.powi(n as i32);
    if level + 1 == n {
        let mut xi = x.clone();
        let mut f = move |t: f64| {
            xi[level] = t;
            weight_product(mu, rs, &xi) * (-xi.iter().map(|c| c * c).sum::<f64>() / 2.0).exp()
        };
        let (v, _) = quadrature::adaptive_with_splits(&mut f, -bound, bound, &splits, tol);
        return Ok(v);
    }
    let mut xi = x.clone();
    let mu2 = mu.clone();
    let rs2 = rs.clone();
    let mut f = move |t: f64| {
        xi[level] = t;
        iterated_integral(&mu2, &rs2, &mut xi.clone(), level + 1, rel_tol).unwrap_or(f64::NAN)
    };
    let (v, _) = quadrature::adaptive_with_splits(&mut f, -bound, bound, &splits, tol);
    Ok(v)
}
