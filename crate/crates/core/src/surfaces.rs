//! Model CMC surfaces and the monotone domain families built on them.
//!
//! Every family is parametrized by `t`, with `D(s) ⊂ D(t)` for `s < t`.
//! One-dimensional families produce unions of intervals; rotationally
//! symmetric two-dimensional families produce a radial extent `(0, t)` that
//! the discretization separates into azimuthal modes.
//!
//! The cylinder family keeps growing past `t = π`, where the immersed
//! geodesic disk starts to overlap itself. Variations live on the abstract
//! disk that the immersion glues along its boundary, and the immersion is a
//! local isometry, so the spectral problem stays the Euclidean disk problem
//! for every `t`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SurfaceKind {
    /// The real line immersed onto the unit circle by `x ↦ e^{ix}`.
    CircleImmersedLine,
    FlatLine,
    /// The unit cylinder `R × S¹`.
    UnitCylinder,
    UnitSphere2,
}

/// Area element in the radial coordinate of a separated problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadialWeight {
    Unit,
    /// `r`, polar coordinates on a flat disk.
    Radius,
    /// `sin θ`, geodesic polar coordinates on the unit sphere.
    Sine,
}

impl RadialWeight {
    pub fn eval(self, r: f64) -> f64 {
        match self {
            RadialWeight::Unit => 1.0,
            RadialWeight::Radius => r,
            RadialWeight::Sine => r.sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceModel {
    pub kind: SurfaceKind,
    /// Squared norm of the second fundamental form, constant on the surface.
    pub b_norm_sq: f64,
    pub dim: u32,
    pub radial_weight: RadialWeight,
}

impl SurfaceModel {
    pub fn new(kind: SurfaceKind) -> Self {
        // |B|² is the sum of squared principal curvatures: (1) on the circle,
        // (1, 0) on the cylinder, (1, 1) on the sphere.
        let (b_norm_sq, dim, radial_weight) = match kind {
            SurfaceKind::CircleImmersedLine => (1.0, 1, RadialWeight::Unit),
            SurfaceKind::FlatLine => (0.0, 1, RadialWeight::Unit),
            SurfaceKind::UnitCylinder => (1.0, 2, RadialWeight::Radius),
            SurfaceKind::UnitSphere2 => (2.0, 2, RadialWeight::Sine),
        };
        SurfaceModel {
            kind,
            b_norm_sq,
            dim,
            radial_weight,
        }
    }
}

pub fn b_norm_sq(surface: &SurfaceModel) -> f64 {
    surface.b_norm_sq
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    /// `D(t) = (0, t)` on the line immersed onto the unit circle.
    CircleInterval,
    /// Two flat intervals growing inward from `±π` that merge at `t = 1`.
    FlatGap,
    /// Geodesic disks of radius `t` on the unit cylinder.
    CylinderDisk,
    /// Geodesic caps of radius `t < π` on the unit sphere.
    SphereCap,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 4] = [
        FamilyKind::CircleInterval,
        FamilyKind::FlatGap,
        FamilyKind::CylinderDisk,
        FamilyKind::SphereCap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::CircleInterval => "circle",
            FamilyKind::FlatGap => "gap",
            FamilyKind::CylinderDisk => "cylinder",
            FamilyKind::SphereCap => "sphere",
        }
    }

    pub fn surface(self) -> SurfaceModel {
        SurfaceModel::new(match self {
            FamilyKind::CircleInterval => SurfaceKind::CircleImmersedLine,
            FamilyKind::FlatGap => SurfaceKind::FlatLine,
            FamilyKind::CylinderDisk => SurfaceKind::UnitCylinder,
            FamilyKind::SphereCap => SurfaceKind::UnitSphere2,
        })
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::input(format!("unknown family `{s}`")))
    }
}

/// Default lower end of every family. Eigenvalues diverge as `t → 0`.
pub const DEFAULT_T_MIN: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainFamily {
    pub surface: SurfaceModel,
    pub family_kind: FamilyKind,
    pub t_min: f64,
    pub t_max: f64,
    /// Declared, not computed: whether `D(t)` is the union of the earlier
    /// domains and the intersection of the later closures.
    pub set_continuous: bool,
    pub description: String,
}

impl DomainFamily {
    /// A built-in family over its default parameter range.
    pub fn builtin(kind: FamilyKind) -> Self {
        let (t_max, set_continuous, description) = match kind {
            FamilyKind::CircleInterval => (
                30.0,
                true,
                "intervals (0, t) on the line immersed onto the unit circle",
            ),
            FamilyKind::FlatGap => (
                1.0,
                false,
                "(-π, -π(1-t)) ∪ (π(1-t), π) on the flat line, merging into (-π, π) at t = 1",
            ),
            FamilyKind::CylinderDisk => (
                8.0,
                true,
                "geodesic disks of radius t on the unit cylinder, self-overlapping for t > π",
            ),
            FamilyKind::SphereCap => (3.0, true, "geodesic caps of radius t on the unit sphere"),
        };
        DomainFamily {
            surface: kind.surface(),
            family_kind: kind,
            t_min: DEFAULT_T_MIN,
            t_max,
            set_continuous,
            description: description.to_string(),
        }
    }

    /// Same family over `[t_min, t_max]`.
    pub fn with_range(mut self, t_min: f64, t_max: f64) -> Result<Self> {
        if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
            return Err(Error::input(format!(
                "family range must satisfy 0 < t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        match self.family_kind {
            FamilyKind::FlatGap if t_max > 1.0 => {
                return Err(Error::Geometry(format!(
                    "gap family is defined for t <= 1, got t_max = {t_max}"
                )))
            }
            FamilyKind::SphereCap if t_max >= PI => {
                return Err(Error::Geometry(format!(
                    "sphere caps need t < π, got t_max = {t_max}"
                )))
            }
            _ => {}
        }
        self.t_min = t_min;
        self.t_max = t_max;
        Ok(self)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_min && t <= self.t_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.a <= other.a && other.b <= self.b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Extent {
    /// Disjoint open intervals in ascending order.
    Intervals(Vec<Interval>),
    /// The radial range `(0, radius)` with the given area element.
    Radial { radius: f64, weight: RadialWeight },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSlice {
    pub t: f64,
    pub family_kind: FamilyKind,
    pub extent: Extent,
    /// Length or area of the domain.
    pub volume: f64,
}

impl DomainSlice {
    pub fn components(&self) -> &[Interval] {
        match &self.extent {
            Extent::Intervals(c) => c,
            Extent::Radial { .. } => &[],
        }
    }

    pub fn component_count(&self) -> usize {
        match &self.extent {
            Extent::Intervals(c) => c.len(),
            Extent::Radial { .. } => 1,
        }
    }

    /// Geometric containment `self ⊂ other`.
    pub fn is_contained_in(&self, other: &DomainSlice) -> bool {
        match (&self.extent, &other.extent) {
            (Extent::Intervals(inner), Extent::Intervals(outer)) => inner
                .iter()
                .all(|c| outer.iter().any(|o| o.contains(c))),
            (
                Extent::Radial { radius: r1, weight: w1 },
                Extent::Radial { radius: r2, weight: w2 },
            ) => w1 == w2 && r1 <= r2,
            _ => false,
        }
    }
}

pub fn domain_at(family: &DomainFamily, t: f64) -> Result<DomainSlice> {
    if !family.contains(t) {
        return Err(Error::ParameterRange {
            t,
            min: family.t_min,
            max: family.t_max,
        });
    }
    let kind = family.family_kind;
    let (extent, volume) = match kind {
        FamilyKind::CircleInterval => (Extent::Intervals(vec![Interval { a: 0.0, b: t }]), t),
        FamilyKind::FlatGap => {
            if t < 1.0 {
                let inner = PI * (1.0 - t);
                let parts = vec![Interval { a: -PI, b: -inner }, Interval { a: inner, b: PI }];
                (Extent::Intervals(parts), 2.0 * PI * t)
            } else if t == 1.0 {
                (Extent::Intervals(vec![Interval { a: -PI, b: PI }]), 2.0 * PI)
            } else {
                return Err(Error::Geometry(format!("gap family is defined for t <= 1, got {t}")));
            }
        }
        FamilyKind::CylinderDisk => (
            Extent::Radial {
                radius: t,
                weight: RadialWeight::Radius,
            },
            PI * t * t,
        ),
        FamilyKind::SphereCap => {
            if t >= PI {
                return Err(Error::Geometry(format!("sphere caps need t < π, got {t}")));
            }
            (
                Extent::Radial {
                    radius: t,
                    weight: RadialWeight::Sine,
                },
                2.0 * PI * (1.0 - t.cos()),
            )
        }
    };
    Ok(DomainSlice {
        t,
        family_kind: kind,
        extent,
        volume,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyMetadata {
    pub monotone_ok: bool,
    pub set_continuous: bool,
}

/// Checks slice containment on consecutive grid pairs and echoes the
/// declared set-continuity flag.
pub fn family_metadata(family: &DomainFamily, t_grid: &[f64]) -> Result<FamilyMetadata> {
    if t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::input("t grid must be strictly ascending"));
    }
    let slices = t_grid
        .iter()
        .map(|&t| domain_at(family, t))
        .collect::<Result<Vec<_>>>()?;
    let monotone_ok = slices
        .windows(2)
        .all(|w| w[0].is_contained_in(&w[1]) && w[0].volume < w[1].volume);
    Ok(FamilyMetadata {
        monotone_ok,
        set_continuous: family.set_continuous,
    })
}
