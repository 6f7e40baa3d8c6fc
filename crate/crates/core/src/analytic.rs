//! Closed-form and semi-analytic spectra used as oracles.
//!
//! On the circle family `D(t) = (0, t)` with `|B|² = 1` the Dirichlet
//! eigenvalues are `k²π²/t² − 1`. The mean-zero problem
//! `−u″ − u = λu + c`, `u(0) = u(t) = 0`, `∫u = 0` has a nontrivial solution
//! exactly when `ψ(ωt) = 0` with `ω² = 1 + λ` and
//! `ψ(s) = 2 − 2 cos s − s sin s`, so its eigenvalues are `(l_k/t)² − 1`
//! where `l_k` are the positive zeros of `ψ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub fn circle_dirichlet_lambda(k: usize, t: f64) -> f64 {
    let kf = k as f64;
    kf * kf * PI * PI / (t * t) - 1.0
}

pub fn psi(t: f64) -> f64 {
    2.0 - 2.0 * t.cos() - t * t.sin()
}

/// Zeros `l_1 < l_2 < …` of `ψ` with the brackets they were found in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiZeros {
    pub zeros: Vec<f64>,
    pub brackets: Vec<(f64, f64)>,
}

impl PsiZeros {
    pub fn first(count: usize) -> Result<Self> {
        let mut zeros = Vec::with_capacity(count);
        let mut brackets = Vec::with_capacity(count);
        for k in 1..=count {
            let (z, br) = psi_zero_bracketed(k)?;
            zeros.push(z);
            brackets.push(br);
        }
        Ok(PsiZeros { zeros, brackets })
    }
}

/// The `k`-th positive zero `l_k` of `ψ`, which lies in `(kπ, (k+1)π]`.
///
/// For odd `k` the zero is `(k+1)π` exactly, since `ψ(2jπ) = 0`. For even
/// `k` it is bisected on `((k + ½)π, (k+1)π)`.
pub fn psi_zero(k: usize) -> Result<f64> {
    psi_zero_bracketed(k).map(|(z, _)| z)
}

fn psi_zero_bracketed(k: usize) -> Result<(f64, (f64, f64))> {
    if k == 0 {
        return Err(Error::input("psi zeros are numbered from k = 1"));
    }
    let kf = k as f64;
    if k % 2 == 1 {
        let z = (kf + 1.0) * PI;
        // ψ(2jπ ± δ) ≈ ∓2jπδ, so a sign change must show on a small bracket.
        let delta = 1e-3;
        let (a, b) = (z - delta, z + delta);
        if !(psi(a) > 0.0 && psi(b) < 0.0) {
            return Err(Error::Numeric {
                message: format!("no sign change of psi around {z} for k = {k}"),
                residual: delta,
            });
        }
        return Ok((z, (a, b)));
    }
    let (a, b) = ((kf + 0.5) * PI, (kf + 1.0) * PI);
    let z = bisect_root(psi, a, b, 0.0)?;
    Ok((z, (a, b)))
}

/// `k`-th twisted eigenvalue of the circle family, `(l_k/t)² − 1`.
pub fn circle_twisted_lambda(k: usize, t: f64) -> Result<f64> {
    let l = psi_zero(k)?;
    Ok((l / t).powi(2) - 1.0)
}

/// Solvability determinant of the mean-zero eigenproblem on `(0, t)`.
///
/// Solutions of `−u″ − u = λu + c` are written in the basis
/// `cos ωx`, `sin(ωx)/ω`, `(cos ωx − 1)/ω²`, which stays regular as
/// `ω → 0`. Imposing `u(0) = 0`, `u(t) = 0` and `∫u = 0` on this basis
/// gives a 3×3 system with determinant `ψ(ωt)/ω⁴`, an entire function of
/// `z = (1 + λ)t²`. The three branches below evaluate it for real `ω`, for
/// `ω` near zero (series), and for imaginary `ω` (hyperbolic form).
///
/// At `λ = 0` the determinant equals `ψ(t)`.
pub fn twisted_det(lambda: f64, t: f64) -> f64 {
    let w2 = 1.0 + lambda;
    let z = w2 * t * t;
    if z.abs() < SERIES_RADIUS {
        let t4 = t.powi(4);
        return t4 * twisted_det_series(z);
    }
    if w2 > 0.0 {
        let s = w2.sqrt() * t;
        psi(s) / (w2 * w2)
    } else {
        let s = (-w2).sqrt() * t;
        (2.0 - 2.0 * s.cosh() + s * s.sinh()) / (w2 * w2)
    }
}

const SERIES_RADIUS: f64 = 0.5;

// ψ(s)/s⁴ = Σ_{j≥0} (−1)^j (2j+2)/(2j+4)! z^j with z = s².
fn twisted_det_series(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut fact = 24.0; // (2j+4)! at j = 0
    let mut zp = 1.0;
    for j in 0..6 {
        let jf = j as f64;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (2.0 * jf + 2.0) / fact * zp;
        zp *= z;
        fact *= (2.0 * jf + 5.0) * (2.0 * jf + 6.0);
    }
    sum
}

/// Bessel function of the first kind of integer order.
///
/// Ascending series for `x ≤ 12`; above that, Miller's backward recurrence
/// normalized by `J₀ + 2ΣJ_{2k} = 1`.
pub fn bessel_j(m: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    if x < 0.0 {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        return sign * bessel_j(m, -x);
    }
    if x <= 12.0 {
        bessel_j_series(m, x)
    } else {
        bessel_j_miller(m, x)
    }
}

fn bessel_j_series(m: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=m {
        term *= half / i as f64;
    }
    let q = -half * half;
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k + m) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn bessel_j_miller(m: u32, x: f64) -> f64 {
    let start = {
        let base = (x.max(m as f64) + 40.0 + 2.0 * x.sqrt()) as usize;
        base + base % 2
    };
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut norm = 0.0;
    let mut want = 0.0;
    for k in (0..start).rev() {
        // J_{k} = (2(k+1)/x) J_{k+1} − J_{k+2}
        let prev = 2.0 * (k + 1) as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if k == m as usize {
            want = cur;
        }
        if k % 2 == 0 && k > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            want *= 1e-250;
        }
    }
    norm += cur;
    want / norm
}

/// The `n`-th positive zero `j_{m,n}` of `J_m`.
///
/// Sign changes are located by a scan from `x = m` whose extent comes from
/// McMahon's asymptotic estimate, then refined by bisection.
pub fn bessel_zero(m: u32, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::input("Bessel zeros are numbered from n = 1"));
    }
    let mu = 4.0 * (m as f64).powi(2);
    let beta = (n as f64 + 0.5 * m as f64 - 0.25) * PI;
    let mcmahon = beta - (mu - 1.0) / (8.0 * beta);
    let end = mcmahon + PI;
    let step = 0.05;
    let mut a = (m as f64).max(step);
    let mut fa = bessel_j(m, a);
    let mut found = 0;
    while a < end + 10.0 {
        let b = a + step;
        let fb = bessel_j(m, b);
        if fa == 0.0 || fa.signum() != fb.signum() {
            found += 1;
            if found == n {
                return bisect_root(|x| bessel_j(m, x), a, b, 0.0);
            }
        }
        a = b;
        fa = fb;
    }
    Err(Error::Numeric {
        message: format!("no bracket for Bessel zero j_({m},{n}) below {end}"),
        residual: end,
    })
}

/// First Dirichlet eigenvalue of the gap family: `1/t²` while the two
/// components are apart, `1/4` once they merge at `t = 1`.
pub fn gap_lambda1(t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::input(format!("gap family needs 0 < t <= 1, got {t}")));
    }
    Ok(if t < 1.0 { 1.0 / (t * t) } else { 0.25 })
}

/// Bisection to machine resolution on a bracket with a sign change.
fn bisect_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Numeric {
            message: format!("no sign change on [{a}, {b}]"),
            residual: b - a,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b || b - a <= tol {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
