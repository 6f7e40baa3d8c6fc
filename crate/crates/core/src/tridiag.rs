//! Symmetric tridiagonal matrices and the two eigen-routes used on them:
//! Sturm-count bisection for a few extreme eigenvalues of a large matrix,
//! and implicit-shift QL for a full decomposition with eigenvectors.

use crate::{Error, Result};

/// Symmetric tridiagonal matrix stored as its diagonal and first
/// off-diagonal (`off.len() == diag.len() - 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::input(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(SymTridiagonal { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    fn pivmin(&self) -> f64 {
        let emax = self.off.iter().fold(1.0_f64, |m, e| m.max(e * e));
        f64::MIN_POSITIVE * emax
    }

    /// Number of eigenvalues strictly below `mu` (negative pivots of the
    /// LDLᵀ factorization of `T − μ`).
    pub fn count_below(&self, mu: f64) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut d = self.diag[0] - mu;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let e = self.off[i - 1];
            d = self.diag[i] - mu - e * e / d;
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// One symmetric-indefinite factorization pass over `T − μ`: returns the
    /// negative-eigenvalue count together with `bᵀ (T − μ)⁻¹ b`.
    ///
    /// A 1×1 pivot that is small against its off-diagonal neighbour would
    /// produce two huge, cancelling terms in the quadratic form, so such
    /// pivots are merged with the next row into a 2×2 block (Bunch's
    /// criterion for tridiagonal matrices).
    pub fn count_and_resolvent(&self, mu: f64, b: &[f64]) -> (usize, f64) {
        debug_assert_eq!(b.len(), self.len());
        let n = self.len();
        let alpha = 0.5 * (5.0_f64.sqrt() - 1.0);
        let sigma = self.norm_bound() + mu.abs();
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut quad = 0.0;
        // Schur complement diagonal and reduced right-hand side at row i
        let mut d = self.diag[0] - mu;
        let mut y = b[0];
        let mut i = 0;
        while i < n {
            let e = if i + 1 < n { self.off[i] } else { 0.0 };
            if i + 1 == n || d.abs() * sigma >= alpha * e * e {
                if d.abs() < pivmin {
                    d = -pivmin;
                }
                if d < 0.0 {
                    count += 1;
                }
                quad += y * y / d;
                if i + 1 < n {
                    let l = e / d;
                    y = b[i + 1] - l * y;
                    d = self.diag[i + 1] - mu - l * e;
                }
                i += 1;
            } else {
                let c = self.diag[i + 1] - mu;
                let z = b[i + 1];
                let det = d * c - e * e;
                if det < 0.0 {
                    count += 1;
                } else if d + c < 0.0 {
                    count += 2;
                }
                quad += (c * y * y - 2.0 * e * y * z + d * z * z) / det;
                if i + 2 < n {
                    let f = self.off[i + 1];
                    // second component of B⁻¹(y, z) and (B⁻¹)₂₂
                    let x2 = (d * z - e * y) / det;
                    y = b[i + 2] - f * x2;
                    d = self.diag[i + 2] - mu - f * f * d / det;
                }
                i += 2;
            }
        }
        (count, quad)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Full eigendecomposition by implicit-shift QL. Eigenvalues ascend;
    /// `vectors[j]` is the orthonormal eigenvector of `values[j]`.
    pub fn eigen_ql(&self, want_vectors: bool) -> Result<TridiagEigen> {
        ql_implicit(&self.diag, &self.off, want_vectors)
    }
}

#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<Vec<f64>>>,
}

const QL_MAX_SWEEPS: usize = 60;

fn ql_implicit(diag: &[f64], off: &[f64], want_vectors: bool) -> Result<TridiagEigen> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    // z[k][i]: component i of eigenvector k
    let mut z: Vec<Vec<f64>> = if want_vectors {
        (0..n)
            .map(|k| {
                let mut v = vec![0.0; n];
                v[k] = 1.0;
                v
            })
            .collect()
    } else {
        Vec::new()
    };

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_SWEEPS {
                return Err(Error::Numeric {
                    message: format!("implicit QL did not converge for eigenvalue {l}"),
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if want_vectors {
                    let (lo, hi) = z.split_at_mut(i + 1);
                    let zi = &mut lo[i];
                    let zi1 = &mut hi[0];
                    for k in 0..n {
                        let f = zi1[k];
                        zi1[k] = s * zi[k] + c * f;
                        zi[k] = c * zi[k] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = want_vectors.then(|| order.iter().map(|&i| z[i].clone()).collect());
    Ok(TridiagEigen { values, vectors })
}

/// Smallest `k` eigenvalues of a function whose eigenvalue count below `μ`
/// is `count(μ)`, by bisection inside `[lo, hi]`.
///
/// Every probe tightens the brackets of all requested eigenvalues, not only
/// the one being refined. Each bracket is shrunk until its width drops below
/// `rel_tol · (1 + |lo| + |hi|)` or `abs_floor`.
pub fn bisect_smallest(
    count: impl Fn(f64) -> usize,
    k: usize,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    abs_floor: f64,
) -> Result<Vec<f64>> {
    bisect_bracketed(count, vec![lo; k], vec![hi; k], rel_tol, abs_floor)
}

/// As [`bisect_smallest`], with an initial bracket `[lower[j], upper[j]]`
/// per eigenvalue. Results never leave their brackets.
pub fn bisect_bracketed(
    count: impl Fn(f64) -> usize,
    mut lower: Vec<f64>,
    mut upper: Vec<f64>,
    rel_tol: f64,
    abs_floor: f64,
) -> Result<Vec<f64>> {
    let k = lower.len();
    debug_assert_eq!(k, upper.len());
    let mut out: Vec<f64> = Vec::with_capacity(k);
    for j in 0..k {
        if j > 0 {
            lower[j] = lower[j].max(out[j - 1]).min(upper[j]);
        }
        let mut iter = 0;
        loop {
            let width = upper[j] - lower[j];
            if width <= rel_tol * (1.0 + lower[j].abs() + upper[j].abs()) || width <= abs_floor {
                break;
            }
            iter += 1;
            if iter > BISECT_MAX_ITER {
                return Err(Error::Numeric {
                    message: format!("bisection for eigenvalue {} did not converge", j + 1),
                    residual: width,
                });
            }
            let mid = 0.5 * (lower[j] + upper[j]);
            if mid <= lower[j] || mid >= upper[j] {
                break;
            }
            let c = count(mid);
            for (i, (l, u)) in lower.iter_mut().zip(upper.iter_mut()).enumerate().skip(j) {
                if c > i {
                    *u = u.min(mid).max(*l);
                } else {
                    *l = l.max(mid).min(*u);
                }
            }
        }
        out.push(0.5 * (lower[j] + upper[j]));
    }
    Ok(out)
}

pub const BISECT_MAX_ITER: usize = 200;

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize, h: f64) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0 / (h * h); n], vec![-1.0 / (h * h); n - 1]).unwrap()
    }

    fn closed_form(n: usize, h: f64, j: usize) -> f64 {
        let x = j as f64 * std::f64::consts::PI / (2.0 * (n + 1) as f64);
        4.0 / (h * h) * x.sin().powi(2)
    }

    #[test]
    fn shape_mismatch_rejected() {
        assert!(SymTridiagonal::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(SymTridiagonal::new(vec![], vec![]).is_err());
    }

    #[test]
    fn sturm_count_on_laplacian() {
        let t = laplacian(50, 0.1);
        let l3 = closed_form(50, 0.1, 3);
        let l4 = closed_form(50, 0.1, 4);
        assert_eq!(t.count_below(0.5 * (l3 + l4)), 3);
        assert_eq!(t.count_below(-1.0), 0);
        assert_eq!(t.count_below(1e9), 50);
    }

    #[test]
    fn ql_matches_closed_form() {
        let n = 40;
        let t = laplacian(n, 0.25);
        let eig = t.eigen_ql(true).unwrap();
        for (j, v) in eig.values.iter().enumerate() {
            let exact = closed_form(n, 0.25, j + 1);
            assert!((v - exact).abs() <= 1e-12 * exact.abs().max(1.0), "{j}: {v} vs {exact}");
        }
        let vecs = eig.vectors.unwrap();
        for a in 0..n {
            let av = t.mul_vec(&vecs[a]);
            for i in 0..n {
                assert!((av[i] - eig.values[a] * vecs[a][i]).abs() < 1e-11);
            }
            for b in 0..n {
                let dot: f64 = vecs[a].iter().zip(&vecs[b]).map(|(x, y)| x * y).sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bisection_matches_ql() {
        let diag: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).sin() * 3.0).collect();
        let off: Vec<f64> = (0..29).map(|i| 1.0 + (i as f64 * 1.3).cos()).collect();
        let t = SymTridiagonal::new(diag, off).unwrap();
        let ql = t.eigen_ql(false).unwrap().values;
        let (lo, hi) = t.gershgorin();
        let bis = bisect_smallest(|mu| t.count_below(mu), 10, lo, hi, 1e-15, 0.0).unwrap();
        for j in 0..10 {
            assert!((bis[j] - ql[j]).abs() < 1e-12, "{j}: {} vs {}", bis[j], ql[j]);
        }
    }

    #[test]
    fn resolvent_matches_dense_solve() {
        let t = laplacian(6, 1.0);
        let b = [1.0, -2.0, 0.5, 0.0, 3.0, 1.0];
        let mu = 0.7;
        let (count, quad) = t.count_and_resolvent(mu, &b);
        assert_eq!(count, t.count_below(mu));
        // via eigendecomposition
        let eig = t.eigen_ql(true).unwrap();
        let vecs = eig.vectors.unwrap();
        let expected: f64 = eig
            .values
            .iter()
            .zip(&vecs)
            .map(|(l, v)| {
                let c: f64 = v.iter().zip(&b).map(|(x, y)| x * y).sum();
                c * c / (l - mu)
            })
            .sum();
        assert!((quad - expected).abs() < 1e-12 * expected.abs().max(1.0));
    }
}
