//! Dirichlet and volume-constrained spectra of an assembled operator.
//!
//! The generalized problem `A x = λ M x` is reduced to standard form by the
//! diagonal scaling `M^{-1/2}`, which keeps every block tridiagonal.
//!
//! The constrained ("twisted") spectrum is the spectrum of the form
//! `fᵀAf` on the hyperplane `wᵀf = 0`. With Dirichlet eigenpairs `(λ_j, u_j)`
//! and `c_j = u_jᵀw`, its eigenvalues are the Dirichlet eigenvalues with
//! `c_j = 0` together with the roots of the secular function
//! `S(μ) = Σ_j c_j² / (λ_j − μ)`, one in each gap between consecutive poles.
//! Two routes evaluate this:
//!
//! * [`solve_twisted`] never forms the eigenbasis. `S(μ) = w̃ᵀ(T − μ)⁻¹w̃`
//!   comes out of the same LDLᵀ sweep that yields the Sturm count, and the
//!   inertia of the bordered matrix gives the number of twisted eigenvalues
//!   below `μ` as `count(μ) − 1 + [S(μ) > 0]`. The `j`-th twisted eigenvalue is
//!   bisected inside `[λ_j, λ_{j+1}]`, so interlacing holds by construction.
//! * [`solve_twisted_full`] diagonalizes every block, deflates zero and
//!   clustered coefficients, bisects `S` between poles and builds the
//!   eigenvectors `x ∝ Σ c_j u_j / (λ_j − μ)`.
//!
//! [`solve_twisted_projected`] is a third, dense route: it restricts the
//! scaled matrix to an orthonormal basis of `w̃⊥` and diagonalizes it by
//! Jacobi rotations. It is `O(n³)` and kept for cross-checks.

use serde::{Deserialize, Serialize};

use crate::dense::{jacobi_eigen, DenseMatrix};
use crate::discretize::{AssembledOperator, OperatorMeta};
use crate::tridiag::{bisect_bracketed, bisect_smallest, SymTridiagonal, BISECT_MAX_ITER};
use crate::{Error, Result};

const DIRICHLET_REL_TOL: f64 = 1e-14;
/// Twisted bisection stops below `1e-12·(1 + |λ_j| + |λ_{j+1}|)`.
const TWISTED_REL_TOL: f64 = 1e-12;
/// Dirichlet eigenvalues closer than this (relative) form a cluster.
const CLUSTER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// `M`-orthonormal eigenvectors, one per value, when requested.
    pub vectors: Option<Vec<Vec<f64>>>,
    pub constrained: bool,
    pub meta: OperatorMeta,
}

impl EigenResult {
    pub fn index_nullity(&self, tol: f64) -> Result<IndexNullity> {
        index_nullity(&self.values, tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexNullity {
    pub index: usize,
    pub nullity: usize,
}

/// `index = #{λ < −tol}`, `nullity = #{|λ| ≤ tol}`.
pub fn index_nullity(values: &[f64], tol: f64) -> Result<IndexNullity> {
    if !(tol > 0.0) {
        return Err(Error::input(format!("nullity tolerance must be positive, got {tol}")));
    }
    Ok(IndexNullity {
        index: values.iter().filter(|&&v| v < -tol).count(),
        nullity: values.iter().filter(|&&v| v.abs() <= tol).count(),
    })
}

/// Nullity tolerance reflecting the `O(h²)` discretization error:
/// `max(1e-6, 5·h²·(1 + max|λ|))`.
pub fn default_null_tol(op: &AssembledOperator, values: &[f64]) -> f64 {
    let h = op.grid.max_spacing();
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    (5.0 * h * h * (1.0 + scale)).max(1e-6)
}

fn check_k(op: &AssembledOperator, k: usize, limit: usize) -> Result<()> {
    if k == 0 || k > limit {
        return Err(Error::input(format!(
            "requested {k} eigenvalues, operator of dimension {} allows 1..={limit}",
            op.dim()
        )));
    }
    Ok(())
}

struct Scaled {
    blocks: Vec<SymTridiagonal>,
    mean: Vec<f64>,
    lo: f64,
    hi: f64,
    norm: f64,
}

impl Scaled {
    fn new(op: &AssembledOperator) -> Self {
        let blocks = op.scaled_blocks();
        let (lo, hi) = blocks.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), b| {
            let (bl, bh) = b.gershgorin();
            (l.min(bl), h.max(bh))
        });
        let norm = lo.abs().max(hi.abs());
        Scaled {
            blocks,
            mean: op.scaled_mean(),
            lo,
            hi,
            norm,
        }
    }

    fn count(&self, mu: f64) -> usize {
        self.blocks.iter().map(|b| b.count_below(mu)).sum()
    }

    /// Twisted count from the inertia of the bordered matrix.
    fn twisted_count(&self, mu: f64) -> usize {
        let mut start = 0;
        let mut count = 0;
        let mut s = 0.0;
        for b in &self.blocks {
            let (c, q) = b.count_and_resolvent(mu, &self.mean[start..start + b.len()]);
            count += c;
            s += q;
            start += b.len();
        }
        (count + usize::from(s > 0.0)).saturating_sub(1)
    }

    fn abs_floor(&self) -> f64 {
        4.0 * f64::EPSILON * self.norm
    }

    fn smallest(&self, k: usize) -> Result<Vec<f64>> {
        bisect_smallest(
            |mu| self.count(mu),
            k,
            self.lo,
            self.hi,
            DIRICHLET_REL_TOL,
            self.abs_floor(),
        )
    }
}

/// The `k` smallest Dirichlet eigenvalues, without eigenvectors.
pub fn solve_dirichlet(op: &AssembledOperator, k: usize) -> Result<EigenResult> {
    check_k(op, k, op.dim())?;
    let values = Scaled::new(op).smallest(k)?;
    Ok(EigenResult {
        values,
        vectors: None,
        constrained: false,
        meta: op.meta,
    })
}

/// Full eigenpairs of every block, merged in ascending order: `(value,
/// scaled eigenvector embedded in the global ordering)`.
fn full_scaled_eigenpairs(op: &AssembledOperator) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = op.dim();
    let mut pairs = Vec::with_capacity(n);
    for (blk, r) in op.scaled_blocks().iter().zip(op.block_ranges()) {
        let eig = blk.eigen_ql(true)?;
        let vecs = eig.vectors.expect("vectors requested");
        for (val, v) in eig.values.into_iter().zip(vecs) {
            let mut full = vec![0.0; n];
            full[r.clone()].copy_from_slice(&v);
            pairs.push((val, full));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}

fn unscale(op: &AssembledOperator, y: &[f64]) -> Vec<f64> {
    y.iter().zip(&op.mass).map(|(v, m)| v / m.sqrt()).collect()
}

/// The `k` smallest Dirichlet eigenpairs by implicit QL on every block.
pub fn solve_dirichlet_full(op: &AssembledOperator, k: usize) -> Result<EigenResult> {
    check_k(op, k, op.dim())?;
    let pairs = full_scaled_eigenpairs(op)?;
    let (values, vectors) = pairs
        .into_iter()
        .take(k)
        .map(|(v, y)| (v, unscale(op, &y)))
        .unzip();
    Ok(EigenResult {
        values,
        vectors: Some(vectors),
        constrained: false,
        meta: op.meta,
    })
}

/// The `k` smallest eigenvalues of the form restricted to `wᵀf = 0`.
///
/// When `w = 0` the constraint is vacuous and the Dirichlet values are
/// returned unchanged.
pub fn solve_twisted(op: &AssembledOperator, k: usize) -> Result<EigenResult> {
    if op.mean_is_zero() {
        let mut res = solve_dirichlet(op, k)?;
        res.constrained = true;
        return Ok(res);
    }
    check_k(op, k, op.dim() - 1)?;
    let scaled = Scaled::new(op);
    let dirichlet = scaled.smallest(k + 1)?;
    let lower = dirichlet[..k].to_vec();
    let upper = dirichlet[1..].to_vec();
    let values = bisect_bracketed(
        |mu| scaled.twisted_count(mu),
        lower,
        upper,
        TWISTED_REL_TOL,
        scaled.abs_floor(),
    )?;
    Ok(EigenResult {
        values,
        vectors: None,
        constrained: true,
        meta: op.meta,
    })
}

/// One pole of the deflated secular function.
struct Pole {
    value: f64,
    coef: f64,
    vector: Vec<f64>,
}

/// Twisted eigenpairs through the explicit Dirichlet eigenbasis.
pub fn solve_twisted_full(op: &AssembledOperator, k: usize) -> Result<EigenResult> {
    if op.mean_is_zero() {
        let mut res = solve_dirichlet_full(op, k)?;
        res.constrained = true;
        return Ok(res);
    }
    check_k(op, k, op.dim() - 1)?;
    let w = op.scaled_mean();
    let wnorm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let pairs = full_scaled_eigenpairs(op)?;

    let mut persist: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut poles: Vec<Pole> = Vec::new();

    // Clusters of (numerically) equal Dirichlet eigenvalues.
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i + 1;
        while j < pairs.len()
            && pairs[j].0 - pairs[j - 1].0 < CLUSTER_TOL * (1.0 + pairs[j].0.abs())
        {
            j += 1;
        }
        let cluster = &pairs[i..j];
        let coefs: Vec<f64> = cluster.iter().map(|(_, v)| dot(v, &w)).collect();
        let (rotated, carried) = rotate_cluster(cluster, &coefs);
        for (idx, (val, vec)) in rotated.into_iter().enumerate() {
            if idx == 0 && carried.abs() > 8.0 * f64::EPSILON * wnorm {
                poles.push(Pole {
                    value: val,
                    coef: carried,
                    vector: vec,
                });
            } else {
                persist.push((val, vec));
            }
        }
        i = j;
    }

    let mut found: Vec<(f64, Vec<f64>)> = persist;
    for gap in poles.windows(2) {
        let (mu, x) = secular_root(&poles, &gap[0], &gap[1])?;
        found.push((mu, x));
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (values, vectors) = found
        .into_iter()
        .take(k)
        .map(|(v, y)| (v, unscale(op, &y)))
        .unzip();
    Ok(EigenResult {
        values,
        vectors: Some(vectors),
        constrained: true,
        meta: op.meta,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Householder rotation of a cluster basis so that only the first vector
/// carries the constraint coefficient. Returns the rotated pairs and that
/// coefficient.
fn rotate_cluster(cluster: &[(f64, Vec<f64>)], coefs: &[f64]) -> (Vec<(f64, Vec<f64>)>, f64) {
    let p = cluster.len();
    if p == 1 {
        return (cluster.to_vec(), coefs[0]);
    }
    let norm = coefs.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm == 0.0 {
        return (cluster.to_vec(), 0.0);
    }
    // H = I − 2vvᵀ/vᵀv maps coefs to ∓‖c‖e₁
    let alpha = -norm.copysign(coefs[0]);
    let mut v = coefs.to_vec();
    v[0] -= alpha;
    let vv = dot(&v, &v);
    let n = cluster[0].1.len();
    let mean_val = cluster.iter().map(|(l, _)| l).sum::<f64>() / p as f64;
    let rotated = (0..p)
        .map(|col| {
            // column `col` of Y·H
            let mut out = vec![0.0; n];
            for (row, (_, y)) in cluster.iter().enumerate() {
                let h = if row == col { 1.0 } else { 0.0 } - 2.0 * v[row] * v[col] / vv;
                if h != 0.0 {
                    for (o, yi) in out.iter_mut().zip(y) {
                        *o += h * yi;
                    }
                }
            }
            (if col == 0 { cluster[0].0 } else { mean_val }, out)
        })
        .collect();
    (rotated, alpha)
}

/// Root of `S(μ) = Σ c²/(λ − μ)` strictly between two consecutive poles,
/// bisected in the offset from the nearer pole so that `λ_j − μ` stays
/// accurate for the eigenvector.
fn secular_root(poles: &[Pole], left: &Pole, right: &Pole) -> Result<(f64, Vec<f64>)> {
    let secular = |origin: f64, tau: f64| -> f64 {
        poles
            .iter()
            .map(|p| p.coef * p.coef / ((p.value - origin) - tau))
            .sum()
    };
    let gap = right.value - left.value;
    let mid_s = secular(left.value, 0.5 * gap);
    // S increases from −∞ to +∞ across the gap.
    let (origin, mut lo, mut hi) = if mid_s >= 0.0 {
        (left.value, 0.0, 0.5 * gap)
    } else {
        (right.value, -0.5 * gap, 0.0)
    };
    let tol = TWISTED_REL_TOL * (1.0 + left.value.abs() + right.value.abs());
    let mut iter = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let width = hi - lo;
        if width <= tol && width <= 4.0 * f64::EPSILON * mid.abs() {
            break;
        }
        iter += 1;
        if iter > BISECT_MAX_ITER {
            if width <= tol {
                break;
            }
            return Err(Error::Numeric {
                message: "secular bisection did not converge".into(),
                residual: width,
            });
        }
        if secular(origin, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    let mu = origin + tau;
    let n = left.vector.len();
    let mut x = vec![0.0; n];
    for p in poles {
        let coef = p.coef / ((p.value - origin) - tau);
        for (xi, vi) in x.iter_mut().zip(&p.vector) {
            *xi += coef * vi;
        }
    }
    let norm = dot(&x, &x).sqrt();
    x.iter_mut().for_each(|xi| *xi /= norm);
    Ok((mu, x))
}

/// Twisted eigenvalues from the dense restriction to `w̃⊥`, all of them.
pub fn solve_twisted_projected(op: &AssembledOperator) -> Result<Vec<f64>> {
    let n = op.dim();
    let blocks = op.scaled_blocks();
    let mut a = DenseMatrix::zeros(n);
    let mut start = 0;
    for b in &blocks {
        for i in 0..b.len() {
            a.set(start + i, start + i, b.diag[i]);
            if i + 1 < b.len() {
                a.set(start + i, start + i + 1, b.off[i]);
                a.set(start + i + 1, start + i, b.off[i]);
            }
        }
        start += b.len();
    }
    if op.mean_is_zero() {
        return Ok(jacobi_eigen(&a)?.0);
    }
    // Householder reflector with H w̃ ∝ e₁; its columns 1.. span w̃⊥.
    let w = op.scaled_mean();
    let wn = dot(&w, &w).sqrt();
    let mut v = w.clone();
    v[0] += wn.copysign(w[0]);
    let vv = dot(&v, &v);
    let basis: Vec<Vec<f64>> = (1..n)
        .map(|col| {
            (0..n)
                .map(|row| if row == col { 1.0 } else { 0.0 } - 2.0 * v[row] * v[col] / vv)
                .collect()
        })
        .collect();
    let a_basis: Vec<Vec<f64>> = basis.iter().map(|q| dense_mul(&a, q)).collect();
    let projected = DenseMatrix::from_fn(n - 1, |i, j| {
        // symmetrize the rounding
        0.5 * (dot(&basis[i], &a_basis[j]) + dot(&basis[j], &a_basis[i]))
    });
    Ok(jacobi_eigen(&projected)?.0)
}

fn dense_mul(a: &DenseMatrix, x: &[f64]) -> Vec<f64> {
    let n = a.dim();
    (0..n)
        .map(|i| (0..n).map(|j| a.get(i, j) * x[j]).sum())
        .collect()
}

/// Discrete Rayleigh quotient `fᵀAf / fᵀMf`.
pub fn rayleigh(op: &AssembledOperator, f: &[f64]) -> Result<f64> {
    if f.len() != op.dim() {
        return Err(Error::input(format!(
            "vector of length {} for operator of dimension {}",
            f.len(),
            op.dim()
        )));
    }
    let denom: f64 = f.iter().zip(&op.mass).map(|(x, m)| x * x * m).sum();
    if denom == 0.0 {
        return Err(Error::input("Rayleigh quotient of the zero vector"));
    }
    Ok(dot(f, &op.apply(f)) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{assemble_interval, assemble_radial};
    use crate::surfaces::{domain_at, DomainFamily, FamilyKind};
    use std::f64::consts::PI;

    fn circle_op(t: f64, n: usize) -> AssembledOperator {
        let fam = DomainFamily::builtin(FamilyKind::CircleInterval);
        assemble_interval(&domain_at(&fam, t).unwrap(), 1.0, n).unwrap()
    }

    #[test]
    fn index_nullity_examples() {
        let r = index_nullity(&[-2.0, -0.5, 1e-9, 3.0], 1e-6).unwrap();
        assert_eq!(r, IndexNullity { index: 2, nullity: 1 });
        let r = index_nullity(&[0.1, 2.0], 1e-6).unwrap();
        assert_eq!(r, IndexNullity { index: 0, nullity: 0 });
        assert!(index_nullity(&[1.0], 0.0).is_err());
    }

    #[test]
    fn k_out_of_range() {
        let op = circle_op(2.0, 5);
        assert!(matches!(solve_dirichlet(&op, 0), Err(Error::Input(_))));
        assert!(matches!(solve_dirichlet(&op, 6), Err(Error::Input(_))));
        assert!(matches!(solve_twisted(&op, 5), Err(Error::Input(_))));
        assert!(solve_twisted(&op, 4).is_ok());
    }

    #[test]
    fn exact_zero_pivot_keeps_twisted_count() {
        // μ = 2/h² − 1 makes the first pivot vanish exactly
        let op = circle_op(0.3, 10);
        let a = solve_twisted(&op, 6).unwrap().values;
        let b = solve_twisted_full(&op, 6).unwrap().values;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9 * (1.0 + y.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn bisection_and_ql_agree() {
        let op = circle_op(5.0, 60);
        let a = solve_dirichlet(&op, 8).unwrap();
        let b = solve_dirichlet_full(&op, 8).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn twisted_routes_agree() {
        let op = circle_op(7.0, 80);
        let a = solve_twisted(&op, 6).unwrap();
        let b = solve_twisted_full(&op, 6).unwrap();
        let c = solve_twisted_projected(&op).unwrap();
        for j in 0..6 {
            assert!((a.values[j] - b.values[j]).abs() < 1e-9, "{j}");
            assert!((a.values[j] - c[j]).abs() < 1e-8, "{j}");
        }
    }

    #[test]
    fn vacuous_constraint_returns_dirichlet() {
        let fam = DomainFamily::builtin(FamilyKind::CylinderDisk);
        let slice = domain_at(&fam, 2.0).unwrap();
        let op = assemble_radial(&slice, &fam.surface, 1, 50).unwrap();
        let d = solve_dirichlet(&op, 4).unwrap();
        let t = solve_twisted(&op, 4).unwrap();
        assert_eq!(d.values, t.values);
        assert!(t.constrained);
    }

    #[test]
    fn gap_cluster_deflates() {
        let fam = DomainFamily::builtin(FamilyKind::FlatGap);
        let op = assemble_interval(&domain_at(&fam, 0.5).unwrap(), 0.0, 40).unwrap();
        let d = solve_dirichlet(&op, 4).unwrap();
        assert!((d.values[0] - d.values[1]).abs() < 1e-10);
        let tw = solve_twisted_full(&op, 3).unwrap();
        assert!((tw.values[0] - d.values[0]).abs() < 1e-10);
        let fast = solve_twisted(&op, 3).unwrap();
        for (a, b) in fast.values.iter().zip(&tw.values) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rayleigh_errors_and_positivity() {
        let op = circle_op(2.0, 10);
        assert!(rayleigh(&op, &[0.0; 10]).is_err());
        assert!(rayleigh(&op, &[1.0; 3]).is_err());
        let fam = DomainFamily::builtin(FamilyKind::FlatGap);
        let flat = assemble_interval(&domain_at(&fam, 1.0).unwrap(), 0.0, 9).unwrap();
        let mut hat = vec![0.0; 9];
        hat[3] = 0.5;
        hat[4] = 1.0;
        hat[5] = 0.5;
        assert!(rayleigh(&flat, &hat).unwrap() > 0.0);
    }

    #[test]
    fn extremal_circle_interval() {
        let op = circle_op(PI, 2000);
        let r = solve_dirichlet(&op, 1).unwrap();
        assert!(r.values[0].abs() < 1e-5);
    }
}
