//! Finite-difference assembly of the stability form
//! `I(f, f) = ∫ |Df|² − |B|² f²` with zero Dirichlet data.
//!
//! Every assembled operator is block-diagonal with one symmetric tridiagonal
//! block per interval component (or a single block for a radial mode), a
//! diagonal mass matrix and a mean vector `w` with `wᵀf ≈ ∫_D f`. The
//! stiffness is scaled so that `fᵀAf ≈ I(f, f)` and `fᵀMf ≈ ∫ f²`.
//!
//! Radial problems use a cell-centred grid `r_i = (i − ½)h` with the outer
//! boundary node at `r = t`. The flux through `r = 0` carries weight
//! `w(0) = 0`, which gives the zero-derivative closure for `m = 0`; for
//! `m ≥ 1` the `m²/w(r)` term drives the solution to zero at the pole.

use serde::{Deserialize, Serialize};

use crate::surfaces::{DomainSlice, Extent, FamilyKind, RadialWeight, SurfaceModel};
use crate::tridiag::SymTridiagonal;
use crate::{Error, Result};

pub const MIN_POINTS: usize = 3;

/// Node layout of an assembled operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    /// Interior node coordinates, one ascending list per component.
    pub nodes: Vec<Vec<f64>>,
    /// Uniform spacing per component.
    pub h: Vec<f64>,
    /// Quadrature weight per node, concatenated across components.
    pub weights: Vec<f64>,
}

impl Grid1D {
    pub fn max_spacing(&self) -> f64 {
        self.h.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorMeta {
    pub family_kind: FamilyKind,
    pub t: f64,
    /// Azimuthal mode; 0 for interval problems.
    pub m: u32,
    /// Interior points per component.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledOperator {
    /// Diagonal blocks of the stiffness matrix, in node order.
    pub blocks: Vec<SymTridiagonal>,
    pub mass: Vec<f64>,
    pub mean: Vec<f64>,
    pub grid: Grid1D,
    pub meta: OperatorMeta,
}

impl AssembledOperator {
    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    /// Index ranges of the blocks in the global node ordering.
    pub fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|b| {
                let r = start..start + b.len();
                start = r.end;
                r
            })
            .collect()
    }

    /// `A x` for the block-diagonal stiffness.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(x.len());
        for (blk, r) in self.blocks.iter().zip(self.block_ranges()) {
            out.extend(blk.mul_vec(&x[r]));
        }
        out
    }

    /// Stiffness entry `A[i][j]`, zero outside the blocks.
    pub fn stiffness_entry(&self, i: usize, j: usize) -> f64 {
        for (blk, r) in self.blocks.iter().zip(self.block_ranges()) {
            if r.contains(&i) {
                if !r.contains(&j) {
                    return 0.0;
                }
                let (li, lj) = (i - r.start, j - r.start);
                return match li.abs_diff(lj) {
                    0 => blk.diag[li],
                    1 => blk.off[li.min(lj)],
                    _ => 0.0,
                };
            }
        }
        0.0
    }

    /// The symmetric standard-form blocks `M^{-1/2} A M^{-1/2}`.
    pub fn scaled_blocks(&self) -> Vec<SymTridiagonal> {
        self.blocks
            .iter()
            .zip(self.block_ranges())
            .map(|(blk, r)| {
                let s: Vec<f64> = self.mass[r].iter().map(|m| 1.0 / m.sqrt()).collect();
                let diag = blk.diag.iter().zip(&s).map(|(d, si)| d * si * si).collect();
                let off = blk
                    .off
                    .iter()
                    .enumerate()
                    .map(|(i, e)| e * s[i] * s[i + 1])
                    .collect();
                SymTridiagonal { diag, off }
            })
            .collect()
    }

    /// `M^{-1/2} w`, the mean functional in the scaled coordinates.
    pub fn scaled_mean(&self) -> Vec<f64> {
        self.mean
            .iter()
            .zip(&self.mass)
            .map(|(w, m)| w / m.sqrt())
            .collect()
    }

    pub fn mean_is_zero(&self) -> bool {
        self.mean.iter().all(|&w| w == 0.0)
    }
}

/// Central differences for `−f″ − b_sq·f` on each interval component.
pub fn assemble_interval(slice: &DomainSlice, b_sq: f64, n: usize) -> Result<AssembledOperator> {
    let comps = match &slice.extent {
        Extent::Intervals(c) => c,
        Extent::Radial { .. } => {
            return Err(Error::input("interval assembly needs a one-dimensional slice"))
        }
    };
    if comps.is_empty() {
        return Err(Error::input("slice has no components"));
    }
    if n < MIN_POINTS {
        return Err(Error::input(format!("need at least {MIN_POINTS} interior points, got {n}")));
    }

    let mut blocks = Vec::with_capacity(comps.len());
    let mut nodes = Vec::with_capacity(comps.len());
    let mut hs = Vec::with_capacity(comps.len());
    let mut mass = Vec::with_capacity(n * comps.len());
    for c in comps {
        let h = c.length() / (n + 1) as f64;
        // h·(FD matrix), so that fᵀAf is a quadrature of the form
        blocks.push(SymTridiagonal {
            diag: vec![2.0 / h - b_sq * h; n],
            off: vec![-1.0 / h; n - 1],
        });
        nodes.push((1..=n).map(|i| c.a + i as f64 * h).collect());
        hs.push(h);
        mass.extend(std::iter::repeat(h).take(n));
    }
    Ok(AssembledOperator {
        blocks,
        mean: mass.clone(),
        grid: Grid1D {
            nodes,
            h: hs,
            weights: mass.clone(),
        },
        mass,
        meta: OperatorMeta {
            family_kind: slice.family_kind,
            t: slice.t,
            m: 0,
            n,
        },
    })
}

/// Radial operator of azimuthal mode `m` on a rotationally symmetric slice:
/// `−(1/w)(w u′)′ + (m²/w²)u − |B|²u` with area element `w(r)`.
pub fn assemble_radial(
    slice: &DomainSlice,
    surface: &SurfaceModel,
    m: u32,
    n: usize,
) -> Result<AssembledOperator> {
    if surface.dim != 2 {
        return Err(Error::input(format!(
            "radial assembly needs a two-dimensional surface, got dim {}",
            surface.dim
        )));
    }
    let (radius, weight) = match &slice.extent {
        Extent::Radial { radius, weight } => (*radius, *weight),
        Extent::Intervals(_) => return Err(Error::input("radial assembly needs a radial slice")),
    };
    if weight != surface.radial_weight {
        return Err(Error::input("slice weight does not match the surface"));
    }
    if n < MIN_POINTS {
        return Err(Error::input(format!("need at least {MIN_POINTS} radial points, got {n}")));
    }

    let h = radius / (n as f64 + 0.5);
    let r: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) * h).collect();
    // area element on the face r = i·h between nodes i - 1 and i
    let face = |i: usize| weight.eval(i as f64 * h);
    let w_node: Vec<f64> = r.iter().map(|&x| weight.eval(x)).collect();
    let m2 = (m as f64).powi(2);
    let b_sq = surface.b_norm_sq;

    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let inner = face(i);
            let outer = face(i + 1);
            (inner + outer) / h + m2 * h / w_node[i] - b_sq * w_node[i] * h
        })
        .collect();
    let off: Vec<f64> = (0..n - 1).map(|i| -face(i + 1) / h).collect();
    let mass: Vec<f64> = w_node.iter().map(|w| w * h).collect();
    let mean = if m == 0 { mass.clone() } else { vec![0.0; n] };

    Ok(AssembledOperator {
        blocks: vec![SymTridiagonal { diag, off }],
        mean,
        grid: Grid1D {
            nodes: vec![r],
            h: vec![h],
            weights: mass.clone(),
        },
        mass,
        meta: OperatorMeta {
            family_kind: slice.family_kind,
            t: slice.t,
            m,
            n,
        },
    })
}

pub fn mean_functional(op: &AssembledOperator) -> &[f64] {
    &op.mean
}

/// Interior points for a component of the given length at `n_per_unit`
/// points per unit length.
pub fn points_for_length(length: f64, n_per_unit: usize) -> usize {
    ((length * n_per_unit as f64).ceil() as usize).max(MIN_POINTS)
}

/// Radial-weight sanity: strictly positive inside `(0, radius)`.
pub fn weight_positive_inside(weight: RadialWeight, radius: f64) -> bool {
    let probes = 64;
    (1..probes).all(|i| weight.eval(radius * i as f64 / probes as f64) > 0.0)
}
