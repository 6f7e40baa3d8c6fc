//! Eigenvalue curves along a domain family, their zero crossings, and the
//! index identities those crossings must satisfy.
//!
//! Along a set-continuous family every Dirichlet and twisted eigenvalue is
//! continuous and strictly decreasing in `t`. A sign change of a row between
//! two samples therefore brackets exactly one crossing, and bisection in `t`
//! (a fresh assembly and solve per probe) refines it. Dirichlet crossings
//! of `λ₁` are extremal domains; twisted crossings are domains carrying
//! Jacobi fields.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::{assemble_interval, assemble_radial, points_for_length, AssembledOperator};
use crate::eig::{default_null_tol, index_nullity, solve_dirichlet, solve_twisted, IndexNullity};
use crate::surfaces::{domain_at, DomainFamily, DomainSlice, Extent};
use crate::{Error, Result};

/// Largest tolerated increase of an eigencurve between adjacent samples.
pub const MONOTONE_NOISE: f64 = 1e-9;
/// Slack in the interlacing inequalities.
pub const INTERLACE_TOL: f64 = 1e-9;
/// A secant slope more than this multiple of its neighbours is a jump.
pub const JUMP_FACTOR: f64 = 5.0;
/// Jumps smaller than this are never reported.
pub const JUMP_FLOOR: f64 = 1e-6;

/// Event refinement stops at a bracket of `REFINE_WIDTH·(1 + t)`.
pub const REFINE_WIDTH: f64 = 1e-6;
/// Events closer than `CLUSTER_WIDTH·(1 + t)` are the same event.
pub const CLUSTER_WIDTH: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    /// Grid points per unit length (radius for radial problems).
    pub n_per_unit: usize,
    /// Highest azimuthal mode kept for radial problems.
    pub m_max: u32,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            n_per_unit: 600,
            m_max: 8,
        }
    }
}

/// The `K` smallest Dirichlet and twisted eigenvalues at one `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub t: f64,
    pub dirichlet: Vec<f64>,
    pub twisted: Vec<f64>,
    /// `λ_{K+1}`, the upper interlacing bound of the last twisted value.
    pub dirichlet_next: f64,
    pub null_tol: f64,
    /// The azimuthal truncation may have dropped eigenvalues below
    /// `λ_{K+1}` (radial families only).
    pub truncated: bool,
}

fn interval_problem(family: &DomainFamily, slice: &DomainSlice, res: Resolution) -> Result<AssembledOperator> {
    let longest = slice
        .components()
        .iter()
        .map(|c| c.length())
        .fold(0.0, f64::max);
    let n = points_for_length(longest, res.n_per_unit);
    assemble_interval(slice, family.surface.b_norm_sq, n)
}

/// Assemble and solve at a single `t`.
pub fn spectrum_at(family: &DomainFamily, t: f64, k: usize, res: Resolution) -> Result<Spectrum> {
    if k == 0 {
        return Err(Error::input("need at least one eigenvalue per sample"));
    }
    let slice = domain_at(family, t)?;
    match &slice.extent {
        Extent::Intervals(_) => {
            let op = interval_problem(family, &slice, res).map_err(|e| e.at(t, None))?;
            let dir = solve_dirichlet(&op, k + 1).map_err(|e| e.at(t, None))?.values;
            let tw = solve_twisted(&op, k).map_err(|e| e.at(t, None))?.values;
            let null_tol = default_null_tol(&op, &dir);
            Ok(Spectrum {
                t,
                dirichlet_next: dir[k],
                dirichlet: dir[..k].to_vec(),
                twisted: tw,
                null_tol,
                truncated: false,
            })
        }
        Extent::Radial { radius, .. } => {
            let n = points_for_length(*radius, res.n_per_unit);
            let mut dir = Vec::new();
            let mut tw = Vec::new();
            let mut null_tol = 0.0_f64;
            let mut top_mode_lowest = f64::INFINITY;
            for m in 0..=res.m_max {
                let op = assemble_radial(&slice, &family.surface, m, n).map_err(|e| e.at(t, Some(m)))?;
                let d = solve_dirichlet(&op, k + 1).map_err(|e| e.at(t, Some(m)))?.values;
                null_tol = null_tol.max(default_null_tol(&op, &d));
                if m == 0 {
                    tw.extend(solve_twisted(&op, k).map_err(|e| e.at(t, Some(m)))?.values);
                    dir.extend_from_slice(&d);
                } else {
                    // e^{±imφ}: every radial eigenvalue appears twice, and the
                    // mean constraint is vacuous.
                    for v in &d {
                        dir.extend([*v, *v]);
                        tw.extend([*v, *v]);
                    }
                }
                if m == res.m_max {
                    top_mode_lowest = d[0];
                }
            }
            dir.sort_by(f64::total_cmp);
            tw.sort_by(f64::total_cmp);
            Ok(Spectrum {
                t,
                dirichlet_next: dir[k],
                dirichlet: dir[..k].to_vec(),
                twisted: tw[..k].to_vec(),
                null_tol,
                truncated: top_mode_lowest < dir[k],
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCurve {
    pub family: DomainFamily,
    pub t_samples: Vec<f64>,
    /// `dirichlet[k][i] = λ_{k+1}(t_i)`.
    pub dirichlet: Vec<Vec<f64>>,
    /// `twisted[k][i] = λ̃_{k+1}(t_i)`.
    pub twisted: Vec<Vec<f64>>,
    /// `λ_{K+1}(t_i)`, the first untracked Dirichlet value.
    pub dirichlet_next: Vec<f64>,
    pub null_tol: Vec<f64>,
    pub truncated: Vec<bool>,
    pub resolution: Resolution,
}

impl EigenCurve {
    pub fn k(&self) -> usize {
        self.dirichlet.len()
    }

    pub fn len(&self) -> usize {
        self.t_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_samples.is_empty()
    }

    pub fn column(&self, kind: EventKind, i: usize) -> Vec<f64> {
        self.rows(kind).iter().map(|r| r[i]).collect()
    }

    pub fn rows(&self, kind: EventKind) -> &[Vec<f64>] {
        match kind {
            EventKind::DirichletZero => &self.dirichlet,
            EventKind::TwistedZero => &self.twisted,
        }
    }
}

fn check_grid(family: &DomainFamily, t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::input("empty t grid"));
    }
    if t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::input("t grid must be strictly ascending"));
    }
    if let Some(&t) = t_grid.iter().find(|&&t| !family.contains(t)) {
        return Err(Error::ParameterRange {
            t,
            min: family.t_min,
            max: family.t_max,
        });
    }
    Ok(())
}

/// `steps` equally spaced samples on `[t_min, t_max]`, endpoints included.
pub fn uniform_grid(t_min: f64, t_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 || !(t_min < t_max) {
        return Err(Error::input(format!(
            "grid needs steps >= 2 and t_min < t_max, got {steps} on [{t_min}, {t_max}]"
        )));
    }
    let dt = (t_max - t_min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i + 1 == steps { t_max } else { t_min + i as f64 * dt })
        .collect())
}

/// Solve at every grid point. Samples are independent and run in parallel
/// on the current rayon pool; results keep grid order.
pub fn trace_curves(family: &DomainFamily, t_grid: &[f64], k: usize, res: Resolution) -> Result<EigenCurve> {
    check_grid(family, t_grid)?;
    let spectra = t_grid
        .par_iter()
        .map(|&t| spectrum_at(family, t, k, res))
        .collect::<Result<Vec<_>>>()?;
    let rows = |pick: fn(&Spectrum) -> &Vec<f64>| -> Vec<Vec<f64>> {
        (0..k).map(|r| spectra.iter().map(|s| pick(s)[r]).collect()).collect()
    };
    Ok(EigenCurve {
        family: family.clone(),
        t_samples: t_grid.to_vec(),
        dirichlet: rows(|s| &s.dirichlet),
        twisted: rows(|s| &s.twisted),
        dirichlet_next: spectra.iter().map(|s| s.dirichlet_next).collect(),
        null_tol: spectra.iter().map(|s| s.null_tol).collect(),
        truncated: spectra.iter().map(|s| s.truncated).collect(),
        resolution: res,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKind {
    /// A Dirichlet eigenvalue reaches zero; for `k = 1` the domain is extremal.
    DirichletZero,
    /// A twisted eigenvalue reaches zero: the boundary is conjugate and the
    /// domain carries a Jacobi field.
    TwistedZero,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::DirichletZero => "dirichlet",
            EventKind::TwistedZero => "twisted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiEvent {
    pub t_star: f64,
    pub kind: EventKind,
    /// Smallest 1-based eigenvalue label crossing at `t_star`.
    pub k: usize,
    pub multiplicity: usize,
    /// Half-width of the final bracket around `t_star`.
    pub refined_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventScan {
    pub events: Vec<JacobiEvent>,
    pub warnings: Vec<String>,
}

/// Largest increase between adjacent samples of any row, with its location.
fn worst_increase(curve: &EigenCurve) -> Option<(EventKind, usize, f64, f64)> {
    let mut worst: Option<(EventKind, usize, f64, f64)> = None;
    for kind in [EventKind::DirichletZero, EventKind::TwistedZero] {
        for (r, row) in curve.rows(kind).iter().enumerate() {
            for i in 0..row.len().saturating_sub(1) {
                let inc = row[i + 1] - row[i];
                if worst.map_or(true, |w| inc > w.3) {
                    worst = Some((kind, r + 1, curve.t_samples[i], inc));
                }
            }
        }
    }
    worst
}

struct Crossing {
    kind: EventKind,
    row: usize,
    lo: f64,
    hi: f64,
    v_lo: f64,
    v_hi: f64,
}

/// Sign changes of every row, optionally refined by bisection in `t`.
///
/// On a set-continuous family a row that increases by more than
/// [`MONOTONE_NOISE`] between samples is a consistency error: the sampled
/// curve is not resolving the decreasing eigenvalue it should be.
pub fn detect_events(curve: &EigenCurve, refine: bool) -> Result<EventScan> {
    if curve.family.set_continuous {
        if let Some((kind, k, t, inc)) = worst_increase(curve) {
            if inc > MONOTONE_NOISE {
                return Err(Error::Consistency(format!(
                    "{} eigenvalue {k} increases by {inc:e} after t = {t}; refine the discretization",
                    kind.name()
                )));
            }
        }
    }

    let mut warnings = Vec::new();
    let mut crossings = Vec::new();
    let ts = &curve.t_samples;
    for kind in [EventKind::DirichletZero, EventKind::TwistedZero] {
        for (r, row) in curve.rows(kind).iter().enumerate() {
            for i in 0..row.len().saturating_sub(1) {
                let (a, b) = (row[i], row[i + 1]);
                if a > 0.0 && b <= 0.0 {
                    crossings.push(Crossing {
                        kind,
                        row: r,
                        lo: ts[i],
                        hi: ts[i + 1],
                        v_lo: a,
                        v_hi: b,
                    });
                } else if a <= 0.0 && b > 0.0 {
                    warnings.push(format!(
                        "{} eigenvalue {} crosses zero upward in [{}, {}]",
                        kind.name(),
                        r + 1,
                        ts[i],
                        ts[i + 1]
                    ));
                }
            }
        }
    }

    let raw = crossings
        .par_iter()
        .map(|c| {
            if refine {
                refine_crossing(curve, c)
            } else {
                let frac = c.v_lo / (c.v_lo - c.v_hi);
                Ok(JacobiEvent {
                    t_star: c.lo + frac * (c.hi - c.lo),
                    kind: c.kind,
                    k: c.row + 1,
                    multiplicity: 1,
                    refined_width: c.hi - c.lo,
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EventScan {
        events: merge_events(raw),
        warnings,
    })
}

fn refine_crossing(curve: &EigenCurve, c: &Crossing) -> Result<JacobiEvent> {
    let (mut lo, mut hi) = (c.lo, c.hi);
    let k = curve.k();
    let probe = |t: f64| -> Result<f64> {
        let s = spectrum_at(&curve.family, t, k, curve.resolution)?;
        Ok(match c.kind {
            EventKind::DirichletZero => s.dirichlet[c.row],
            EventKind::TwistedZero => s.twisted[c.row],
        })
    };
    let mut iter = 0;
    while hi - lo > REFINE_WIDTH * (1.0 + hi.abs()) {
        iter += 1;
        if iter > 200 {
            return Err(Error::Numeric {
                message: format!("event refinement near t = {lo} did not converge"),
                residual: hi - lo,
            });
        }
        let mid = 0.5 * (lo + hi);
        if probe(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(JacobiEvent {
        t_star: 0.5 * (lo + hi),
        kind: c.kind,
        k: c.row + 1,
        multiplicity: 1,
        refined_width: 0.5 * (hi - lo),
    })
}

/// Merge simultaneous crossings of several rows into one event whose
/// multiplicity counts the rows.
fn merge_events(mut raw: Vec<JacobiEvent>) -> Vec<JacobiEvent> {
    raw.sort_by(|a, b| {
        a.kind
            .cmp(&b.kind)
            .then(a.t_star.total_cmp(&b.t_star))
            .then(a.k.cmp(&b.k))
    });
    let mut merged: Vec<JacobiEvent> = Vec::new();
    for ev in raw {
        if let Some(last) = merged.last_mut() {
            if last.kind == ev.kind && (ev.t_star - last.t_star).abs() <= cluster_tol(ev.t_star) {
                last.multiplicity += ev.multiplicity;
                last.k = last.k.min(ev.k);
                last.refined_width = last.refined_width.max(ev.refined_width);
                continue;
            }
        }
        merged.push(ev);
    }
    merged.sort_by(|a, b| {
        a.t_star
            .total_cmp(&b.t_star)
            .then(a.kind.cmp(&b.kind))
            .then(a.k.cmp(&b.k))
    });
    merged
}

pub fn cluster_tol(t: f64) -> f64 {
    CLUSTER_WIDTH * (1.0 + t.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    /// A failure the theory predicts, e.g. a continuity violation on a
    /// family that is not set-continuous.
    pub expected: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, ok: bool, detail: String) -> Self {
        Check {
            name: name.to_string(),
            ok,
            expected: false,
            detail,
        }
    }

    /// Passed, or failed in a way the theory predicts.
    pub fn acceptable(&self) -> bool {
        self.ok || self.expected
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexSample {
    pub t: f64,
    pub dirichlet: IndexNullity,
    pub twisted: IndexNullity,
    /// `λ_{K+1}` or `λ̃_K` is not positive, so an index may exceed what the
    /// tracked rows can show.
    pub saturated: bool,
    /// Twisted zero crossings (with multiplicity) below `t`, plus the index
    /// at the first sample.
    pub events_below: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiInterval {
    /// Consecutive distinct Dirichlet zero times `t̄_{k−1} < t̄_k`.
    pub left: f64,
    pub right: f64,
    pub m_left: usize,
    pub m_right: usize,
    /// Twisted zeros in `(t̄_{k−1}, t̄_k]`.
    pub mu_half_open: usize,
    /// Twisted zeros in `[t̄_{k−1}, t̄_k]`.
    pub mu_closed: usize,
    /// Twisted zeros at `t̄_k`.
    pub mu_point: usize,
    pub half_open_ok: bool,
    pub closed_ok: bool,
    pub point_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseReport {
    pub curve: EigenCurve,
    pub events: Vec<JacobiEvent>,
    pub index: Vec<IndexSample>,
    pub jacobi_intervals: Vec<JacobiInterval>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl MorseReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn flag(&self, name: &str) -> bool {
        self.check(name).is_some_and(|c| c.ok)
    }

    pub fn identity_ok(&self) -> bool {
        self.flag(CHECK_IDENTITY)
    }

    pub fn index_sandwich_ok(&self) -> bool {
        self.flag(CHECK_INDEX_SANDWICH)
    }

    pub fn interlacing_ok(&self) -> bool {
        self.flag(CHECK_INTERLACING)
    }

    pub fn monotone_ok(&self) -> bool {
        self.flag(CHECK_MONOTONE)
    }

    pub fn first_conjugate_ok(&self) -> bool {
        self.flag(CHECK_FIRST_CONJUGATE)
    }

    /// No check failed unexpectedly.
    pub fn all_acceptable(&self) -> bool {
        self.checks.iter().all(Check::acceptable)
    }
}

pub const CHECK_IDENTITY: &str = "morse_identity";
pub const CHECK_INDEX_SANDWICH: &str = "index_sandwich";
pub const CHECK_INTERLACING: &str = "interlacing";
pub const CHECK_MONOTONE: &str = "monotone";
pub const CHECK_CONTINUITY: &str = "continuity";
pub const CHECK_FIRST_CONJUGATE: &str = "first_conjugate_nesting";
pub const CHECK_JACOBI_COUNTS: &str = "jacobi_distribution";

/// Run every check on a traced curve and its events.
pub fn verify(curve: &EigenCurve, scan: &EventScan) -> Result<MorseReport> {
    let k = curve.k();
    let n = curve.len();
    if k == 0 || n == 0 {
        return Err(Error::input("empty curve"));
    }
    let range = (curve.t_samples[0], curve.t_samples[n - 1]);
    for ev in &scan.events {
        if ev.k == 0 || ev.k > k || ev.t_star < range.0 || ev.t_star > range.1 || ev.multiplicity == 0 {
            return Err(Error::input(format!(
                "event at t = {} (k = {}) does not belong to this curve",
                ev.t_star, ev.k
            )));
        }
    }

    let mut warnings = scan.warnings.clone();
    if curve.truncated.iter().any(|&t| t) {
        warnings.push(format!(
            "azimuthal truncation m_max = {} may hide eigenvalues at some samples",
            curve.resolution.m_max
        ));
    }

    let index = index_samples(curve, &scan.events)?;
    let set_continuous = curve.family.set_continuous;
    let mut checks = vec![
        identity_check(&index),
        sandwich_check(&index),
        interlacing_check(curve),
    ];

    let mut monotone = monotone_check(curve);
    let mut continuity = continuity_check(curve);
    if !set_continuous {
        monotone.expected = !monotone.ok;
        continuity.expected = !continuity.ok;
        if !continuity.ok {
            continuity.detail.push_str("; expected: the family is not set-continuous");
        }
    }
    checks.push(monotone);
    checks.push(continuity);
    checks.push(first_conjugate_check(&scan.events));
    let (jacobi_intervals, counts) = jacobi_counts(curve, &scan.events);
    checks.push(counts);

    Ok(MorseReport {
        curve: curve.clone(),
        events: scan.events.clone(),
        index,
        jacobi_intervals,
        checks,
        warnings,
    })
}

fn index_samples(curve: &EigenCurve, events: &[JacobiEvent]) -> Result<Vec<IndexSample>> {
    let k = curve.k();
    let mut baseline = None;
    let mut out = Vec::with_capacity(curve.len());
    for (i, &t) in curve.t_samples.iter().enumerate() {
        let tol = curve.null_tol[i];
        let dir = curve.column(EventKind::DirichletZero, i);
        let tw = curve.column(EventKind::TwistedZero, i);
        let d_idx = index_nullity(&dir, tol)?;
        let t_idx = index_nullity(&tw, tol)?;
        let base = *baseline.get_or_insert(t_idx.index);
        // Crossings strictly below t. A crossing whose row is still inside
        // the nullity window at t counts as a zero at t, not below it.
        let below: usize = events
            .iter()
            .filter(|e| e.kind == EventKind::TwistedZero && e.t_star < t)
            .filter(|e| tw[e.k - 1].abs() > tol)
            .map(|e| e.multiplicity)
            .sum();
        out.push(IndexSample {
            t,
            dirichlet: d_idx,
            twisted: t_idx,
            saturated: curve.dirichlet_next[i] <= tol || tw[k - 1] <= tol,
            events_below: base + below,
        });
    }
    Ok(out)
}

fn identity_check(index: &[IndexSample]) -> Check {
    let usable: Vec<&IndexSample> = index.iter().filter(|s| !s.saturated).collect();
    let bad: Vec<&&IndexSample> = usable
        .iter()
        .filter(|s| s.twisted.index != s.events_below)
        .collect();
    let max_index = usable.iter().map(|s| s.twisted.index).max().unwrap_or(0);
    let mut detail = format!(
        "twisted index matched the crossing count at {}/{} samples (baseline {}, max index {max_index})",
        usable.len() - bad.len(),
        usable.len(),
        index.first().map_or(0, |s| s.events_below),
    );
    if usable.len() < index.len() {
        detail.push_str(&format!("; {} saturated samples skipped", index.len() - usable.len()));
    }
    if let Some(s) = bad.first() {
        detail.push_str(&format!(
            "; first mismatch at t = {}: index {} vs {} crossings",
            s.t, s.twisted.index, s.events_below
        ));
    }
    Check::new(CHECK_IDENTITY, bad.is_empty(), detail)
}

fn sandwich_check(index: &[IndexSample]) -> Check {
    let usable: Vec<&IndexSample> = index.iter().filter(|s| !s.saturated).collect();
    let bad: Vec<&&IndexSample> = usable
        .iter()
        .filter(|s| !(s.twisted.index <= s.dirichlet.index && s.twisted.index + 1 >= s.dirichlet.index))
        .collect();
    let mut detail = format!(
        "i - 1 <= ĩ <= i held at {}/{} samples",
        usable.len() - bad.len(),
        usable.len()
    );
    if let Some(s) = bad.first() {
        detail.push_str(&format!(
            "; violated at t = {}: i = {}, ĩ = {}",
            s.t, s.dirichlet.index, s.twisted.index
        ));
    }
    Check::new(CHECK_INDEX_SANDWICH, bad.is_empty(), detail)
}

fn interlacing_check(curve: &EigenCurve) -> Check {
    let k = curve.k();
    let mut worst = 0.0_f64;
    let mut at = None;
    for i in 0..curve.len() {
        for r in 0..k {
            let lower = curve.dirichlet[r][i];
            let upper = if r + 1 < k {
                curve.dirichlet[r + 1][i]
            } else {
                curve.dirichlet_next[i]
            };
            let tw = curve.twisted[r][i];
            let excess = (lower - tw).max(tw - upper);
            if excess > worst {
                worst = excess;
                at = Some((curve.t_samples[i], r + 1));
            }
        }
    }
    let ok = worst <= INTERLACE_TOL;
    let detail = match at {
        Some((t, r)) => format!("largest violation {worst:e} at t = {t}, k = {r}"),
        None => "λ_k <= λ̃_k <= λ_(k+1) exactly at every sample".to_string(),
    };
    Check::new(CHECK_INTERLACING, ok, detail)
}

fn monotone_check(curve: &EigenCurve) -> Check {
    match worst_increase(curve) {
        Some((kind, k, t, inc)) if inc > MONOTONE_NOISE => Check::new(
            CHECK_MONOTONE,
            false,
            format!("{} eigenvalue {k} increases by {inc:e} after t = {t}", kind.name()),
        ),
        Some((_, _, _, inc)) => Check::new(
            CHECK_MONOTONE,
            true,
            format!("every row non-increasing; largest step {inc:e}"),
        ),
        None => Check::new(CHECK_MONOTONE, true, "single sample".into()),
    }
}

/// Secant slopes of a row; a slope that exceeds [`JUMP_FACTOR`] times both
/// neighbouring slopes (or its only neighbour) marks a jump.
pub fn find_jumps(t: &[f64], row: &[f64]) -> Vec<(f64, f64)> {
    let n = row.len();
    if n < 3 {
        return Vec::new();
    }
    let slopes: Vec<f64> = (0..n - 1)
        .map(|i| (row[i + 1] - row[i]) / (t[i + 1] - t[i]))
        .collect();
    let mut jumps = Vec::new();
    for i in 0..slopes.len() {
        let left = if i > 0 { Some(slopes[i - 1].abs()) } else { None };
        let right = slopes.get(i + 1).map(|s| s.abs());
        let local = match (left, right) {
            (Some(a), Some(b)) => a.max(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => continue,
        };
        let step = (row[i + 1] - row[i]).abs();
        if step > JUMP_FLOOR && slopes[i].abs() > JUMP_FACTOR * local {
            jumps.push((t[i], row[i + 1] - row[i]));
        }
    }
    jumps
}

fn continuity_check(curve: &EigenCurve) -> Check {
    let mut found = Vec::new();
    for kind in [EventKind::DirichletZero, EventKind::TwistedZero] {
        for (r, row) in curve.rows(kind).iter().enumerate() {
            for (t, jump) in find_jumps(&curve.t_samples, row) {
                found.push(format!("{} λ_{} jumps by {jump:.6} after t = {t}", kind.name(), r + 1));
            }
        }
    }
    if found.is_empty() {
        Check::new(CHECK_CONTINUITY, true, "no jumps between adjacent samples".into())
    } else {
        let shown = found.iter().take(4).cloned().collect::<Vec<_>>().join("; ");
        Check::new(CHECK_CONTINUITY, false, format!("{} jumps: {shown}", found.len()))
    }
}

fn first_of(events: &[JacobiEvent], kind: EventKind, row: usize) -> Option<&JacobiEvent> {
    events
        .iter()
        .find(|e| e.kind == kind && e.k <= row && e.k + e.multiplicity > row)
}

/// The first conjugate boundary lies after the extremal domain and no later
/// than the zero of `λ₂`.
fn first_conjugate_check(events: &[JacobiEvent]) -> Check {
    let t1 = first_of(events, EventKind::DirichletZero, 1);
    let t2 = first_of(events, EventKind::DirichletZero, 2);
    let c = first_of(events, EventKind::TwistedZero, 1);
    match (t1, c, t2) {
        (Some(t1), Some(c), Some(t2)) => {
            let tol = cluster_tol(c.t_star);
            let after_first = c.t_star > t1.t_star + tol;
            let before_second = c.t_star <= t2.t_star + tol;
            let coincident = (c.t_star - t2.t_star).abs() <= tol;
            let detail = format!(
                "t1 = {}, c = {}, t2 = {}{}",
                t1.t_star,
                c.t_star,
                t2.t_star,
                if coincident { " (c coincides with t2)" } else { "" }
            );
            Check::new(CHECK_FIRST_CONJUGATE, after_first && before_second, detail)
        }
        _ => Check::new(
            CHECK_FIRST_CONJUGATE,
            true,
            "skipped: the sampled range does not contain t1, c and t2".into(),
        ),
    }
}

fn jacobi_counts(curve: &EigenCurve, events: &[JacobiEvent]) -> (Vec<JacobiInterval>, Check) {
    let k = curve.k();
    let dirichlet: Vec<&JacobiEvent> = events
        .iter()
        .filter(|e| e.kind == EventKind::DirichletZero)
        .collect();
    let twisted: Vec<&JacobiEvent> = events
        .iter()
        .filter(|e| e.kind == EventKind::TwistedZero)
        .collect();

    // A zero involving the last tracked row may have an untracked partner.
    let complete = |e: &JacobiEvent| -> bool {
        if e.k + e.multiplicity <= k {
            return true;
        }
        let i = curve
            .t_samples
            .iter()
            .position(|&t| t >= e.t_star)
            .unwrap_or(curve.len() - 1);
        curve.dirichlet_next[i] > curve.null_tol[i]
    };

    let count = |pred: &dyn Fn(f64) -> bool| -> usize {
        twisted
            .iter()
            .filter(|e| pred(e.t_star))
            .map(|e| e.multiplicity)
            .sum()
    };

    let mut intervals = Vec::new();
    let mut skipped = 0;
    for pair in dirichlet.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if !complete(a) || !complete(b) {
            skipped += 1;
            continue;
        }
        let (ta, tb) = (a.t_star, b.t_star);
        let (tol_a, tol_b) = (cluster_tol(ta), cluster_tol(tb));
        let half_open = count(&|t| t > ta + tol_a && t <= tb + tol_b);
        let closed = count(&|t| t >= ta - tol_a && t <= tb + tol_b);
        let point = count(&|t| (t - tb).abs() <= tol_b);
        let (ml, mr) = (a.multiplicity, b.multiplicity);
        intervals.push(JacobiInterval {
            left: ta,
            right: tb,
            m_left: ml,
            m_right: mr,
            mu_half_open: half_open,
            mu_closed: closed,
            mu_point: point,
            half_open_ok: mr - 1 <= half_open && half_open <= mr + 1,
            closed_ok: ml + mr - 1 <= closed && closed <= ml + mr + 1,
            point_ok: mr - 1 <= point && point <= mr + 1,
        });
    }
    let bad: Vec<&JacobiInterval> = intervals
        .iter()
        .filter(|iv| !(iv.half_open_ok && iv.closed_ok && iv.point_ok))
        .collect();
    let mut detail = format!(
        "{}/{} consecutive Dirichlet-zero intervals within bounds",
        intervals.len() - bad.len(),
        intervals.len()
    );
    if skipped > 0 {
        detail.push_str(&format!("; {skipped} skipped at the tracked-row limit"));
    }
    if let Some(iv) = bad.first() {
        detail.push_str(&format!(
            "; first violation on ({}, {}]: μ = {} (half-open), {} (closed), {} (point), m = ({}, {})",
            iv.left, iv.right, iv.mu_half_open, iv.mu_closed, iv.mu_point, iv.m_left, iv.m_right
        ));
    }
    let ok = bad.is_empty();
    (intervals, Check::new(CHECK_JACOBI_COUNTS, ok, detail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::FamilyKind;

    fn synthetic_curve(rows: Vec<Vec<f64>>, t: Vec<f64>) -> EigenCurve {
        let n = t.len();
        EigenCurve {
            family: DomainFamily::builtin(FamilyKind::CircleInterval),
            t_samples: t,
            twisted: rows.clone(),
            dirichlet_next: vec![100.0; n],
            null_tol: vec![1e-6; n],
            truncated: vec![false; n],
            dirichlet: rows,
            resolution: Resolution::default(),
        }
    }

    #[test]
    fn positive_rows_have_no_events() {
        let curve = synthetic_curve(vec![vec![3.0, 2.0, 1.0]], vec![1.0, 2.0, 3.0]);
        let scan = detect_events(&curve, false).unwrap();
        assert!(scan.events.is_empty());
    }

    #[test]
    fn increasing_row_is_a_consistency_error() {
        let curve = synthetic_curve(vec![vec![1.0, 2.0, 0.5]], vec![1.0, 2.0, 3.0]);
        assert!(matches!(detect_events(&curve, false), Err(Error::Consistency(_))));
    }

    #[test]
    fn unrefined_event_interpolates() {
        let curve = synthetic_curve(vec![vec![1.0, -1.0]], vec![1.0, 2.0]);
        let scan = detect_events(&curve, false).unwrap();
        // one Dirichlet and one twisted event at the same place
        assert_eq!(scan.events.len(), 2);
        assert!((scan.events[0].t_star - 1.5).abs() < 1e-15);
    }

    #[test]
    fn simultaneous_crossings_merge() {
        let raw = vec![
            JacobiEvent { t_star: 3.0, kind: EventKind::DirichletZero, k: 3, multiplicity: 1, refined_width: 1e-7 },
            JacobiEvent { t_star: 3.0 + 1e-7, kind: EventKind::DirichletZero, k: 2, multiplicity: 1, refined_width: 1e-7 },
            JacobiEvent { t_star: 1.0, kind: EventKind::TwistedZero, k: 1, multiplicity: 1, refined_width: 1e-7 },
        ];
        let merged = merge_events(raw);
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[0].kind, EventKind::TwistedZero);
        assert_eq!(merged[1].k, 2);
        assert_eq!(merged[1].multiplicity, 2);
    }

    #[test]
    fn jump_detection() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let mut row: Vec<f64> = t.iter().map(|x| 10.0 - x).collect();
        assert!(find_jumps(&t, &row).is_empty());
        for v in row.iter_mut().skip(6) {
            *v -= 20.0;
        }
        let j = find_jumps(&t, &row);
        assert_eq!(j.len(), 1);
        assert_eq!(j[0].0, 5.0);
    }

    #[test]
    fn uniform_grid_endpoints() {
        let g = uniform_grid(0.5, 22.0, 200).unwrap();
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 0.5);
        assert_eq!(g[199], 22.0);
        assert!(uniform_grid(1.0, 2.0, 1).is_err());
    }

    #[test]
    fn grid_validation() {
        let fam = DomainFamily::builtin(FamilyKind::CircleInterval);
        let res = Resolution { n_per_unit: 50, m_max: 0 };
        assert!(trace_curves(&fam, &[2.0, 1.0], 2, res).is_err());
        assert!(matches!(
            trace_curves(&fam, &[0.1, 1.0], 2, res),
            Err(Error::ParameterRange { .. })
        ));
    }

    #[test]
    fn verify_rejects_foreign_events() {
        let curve = synthetic_curve(vec![vec![1.0, 0.5]], vec![1.0, 2.0]);
        let scan = EventScan {
            events: vec![JacobiEvent {
                t_star: 5.0,
                kind: EventKind::TwistedZero,
                k: 1,
                multiplicity: 1,
                refined_width: 0.0,
            }],
            warnings: vec![],
        };
        assert!(matches!(verify(&curve, &scan), Err(Error::Input(_))));
    }
}
