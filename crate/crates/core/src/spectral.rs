//! Eigenphase arc geometry, unitary fidelity and pure-state trace distance.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{eigen_system, wrap_phase, PhaseSpectrum, StateVector, UnitaryMatrix, C64};

/// Smallest counter-clockwise arc covering a set of eigenphases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcResult {
    pub theta: f64,
    pub start_phase: f64,
    pub end_phase: f64,
    /// Positions of the endpoints in the spectrum they were computed from.
    #[serde(skip)]
    pub start_index: usize,
    #[serde(skip)]
    pub end_index: usize,
}

/// Smallest covering arc by sort and largest circular gap.
pub fn smallest_arc(spec: &PhaseSpectrum) -> Result<ArcResult> {
    smallest_arc_of_phases(&spec.phases)
}

/// Same as [`smallest_arc`] on bare phases (any real values; reduced mod 2pi).
///
/// Indices in the result refer to positions in `phases`.
pub fn smallest_arc_of_phases(phases: &[f64]) -> Result<ArcResult> {
    if phases.is_empty() {
        return Err(Error::Domain("smallest arc of an empty spectrum".into()));
    }
    if phases.iter().any(|p| !p.is_finite()) {
        return Err(Error::Domain("non-finite phase".into()));
    }
    let mut order: Vec<(f64, usize)> = phases.iter().map(|&p| wrap_phase(p)).zip(0..).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let k = order.len();

    // gap i runs from order[i] to order[i+1]; the last one wraps through 2pi.
    // Strict comparison keeps the gap with the smallest starting phase on ties.
    let mut best_gap = -1.0;
    let mut best_i = 0;
    for i in 0..k {
        let gap = if i + 1 < k {
            order[i + 1].0 - order[i].0
        } else {
            order[0].0 + TAU - order[k - 1].0
        };
        if gap > best_gap {
            best_gap = gap;
            best_i = i;
        }
    }
    let (start_phase, start_index) = order[(best_i + 1) % k];
    let (end_phase, end_index) = order[best_i];
    let theta = (TAU - best_gap).max(0.0);
    Ok(ArcResult {
        theta: if theta >= TAU { 0.0 } else { theta },
        start_phase,
        end_phase,
        start_index,
        end_index,
    })
}

/// `cos(theta/2)` below pi, exactly zero from pi on.
pub fn fidelity_closed_form(theta: f64) -> Result<f64> {
    if !(0.0..TAU).contains(&theta) {
        return Err(Error::Domain(format!("theta {theta} outside [0, 2pi)")));
    }
    if theta >= PI {
        Ok(0.0)
    } else {
        Ok((theta / 2.0).cos().max(0.0))
    }
}

/// Closest point of the convex hull of unit-circle points to the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullDistance {
    pub distance: f64,
    /// The closest hull point; the origin itself when it lies inside.
    pub closest: C64,
    pub contains_origin: bool,
}

/// Distance from the origin to the convex hull of `points`, computed in the
/// plane without reference to eigenphase arcs.
pub fn hull_distance(points: &[C64]) -> Result<HullDistance> {
    if points.is_empty() {
        return Err(Error::Domain("hull of an empty point set".into()));
    }
    if let Some(p) = points.iter().find(|p| (p.norm() - 1.0).abs() > 1e-10) {
        return Err(Error::Domain(format!("point {p} is not on the unit circle")));
    }
    let hull = convex_hull(points);
    let origin = C64::new(0.0, 0.0);
    match hull.len() {
        1 => Ok(HullDistance {
            distance: hull[0].norm(),
            closest: hull[0],
            contains_origin: false,
        }),
        2 => {
            let m = closest_on_segment(hull[0], hull[1]);
            Ok(HullDistance {
                distance: m.norm(),
                closest: m,
                contains_origin: m.norm() == 0.0,
            })
        }
        n => {
            let inside = (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], origin) >= 0.0);
            if inside {
                return Ok(HullDistance {
                    distance: 0.0,
                    closest: origin,
                    contains_origin: true,
                });
            }
            let m = (0..n)
                .map(|i| closest_on_segment(hull[i], hull[(i + 1) % n]))
                .min_by(|a, b| a.norm().total_cmp(&b.norm()))
                .expect("non-empty hull");
            Ok(HullDistance {
                distance: m.norm(),
                closest: m,
                contains_origin: false,
            })
        }
    }
}

/// `min |sum_j w_j p_j|` over convex weights, via the hull geometry.
pub fn fidelity_hull_oracle(points: &[C64]) -> Result<f64> {
    Ok(hull_distance(points)?.distance)
}

/// z-component of `(b - a) x (c - a)`
fn cross(a: C64, b: C64, c: C64) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

/// Closest point to the origin on segment `ab`.
fn closest_on_segment(a: C64, b: C64) -> C64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return a;
    }
    let t = (-(a.re * ab.re + a.im * ab.im) / len2).clamp(0.0, 1.0);
    a + ab * t
}

/// Andrew's monotone chain; counter-clockwise, without repeated or collinear points.
fn convex_hull(points: &[C64]) -> Vec<C64> {
    let mut pts: Vec<C64> = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup_by(|a, b| (*a - *b).norm() <= 1e-15);
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<C64> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<C64> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// `2 sqrt(1 - |<a|b>|^2)`, clamped into `[0, 2]`.
///
/// The square root is evaluated as the norm of the part of `b` orthogonal to
/// `a`; `1 - |<a|b>|^2` itself cancels catastrophically for nearly equal states.
pub fn trace_distance_pure(a: &StateVector, b: &StateVector) -> Result<f64> {
    let ab = a.inner(b)?;
    let aa = a.norm().powi(2);
    let coef = ab / aa;
    let perp = b
        .amplitudes()
        .iter()
        .zip(a.amplitudes())
        .map(|(y, x)| (y - coef * x).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok((2.0 * perp / b.norm()).clamp(0.0, 2.0))
}

/// Arc of the eigenphases of `u1^dagger u2`, with the spectrum it came from.
pub fn relative_arc(u1: &UnitaryMatrix, u2: &UnitaryMatrix) -> Result<(ArcResult, PhaseSpectrum)> {
    if u1.dim() != u2.dim() {
        return Err(Error::Shape(format!(
            "unitaries of different dimension: {} and {}",
            u1.dim(),
            u2.dim()
        )));
    }
    let w = u1.adjoint().compose(u2)?;
    let spec = eigen_system(&w)?;
    let arc = smallest_arc(&spec)?;
    Ok((arc, spec))
}

/// `F(U1, U2)` through the closed form on the smallest arc.
pub fn unitary_fidelity(u1: &UnitaryMatrix, u2: &UnitaryMatrix) -> Result<f64> {
    let (arc, _) = relative_arc(u1, u2)?;
    fidelity_closed_form(arc.theta)
}
