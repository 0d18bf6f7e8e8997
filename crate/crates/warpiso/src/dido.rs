//! The isoperimetric profile `𝓘(h) = μ(h)/I(h)` (the area-to-volume ratio of
//! constant-height rooms, equal to `d/dh log I`), its critical points, the
//! positive lower bound `ω`, the volume bound `Vol(R) ≤ Vol(C)/ω`, and the
//! fixed-area max-volume solver.
//!
//! At a critical point of the profile, `𝓘 = k·f'/f`; since `k·f'/f` is
//! nondecreasing for log-convex `f`, critical values are nondecreasing and
//! the first one is the profile's minimum.

use crate::error::{Error, Result};
use crate::geom::{ceiling_area, room_volume, AreaMode, Ceiling, Floor};
use crate::quad::MuIntegral;

/// Default number of scan points for critical-point bracketing.
pub const DEFAULT_CRIT_GRID: usize = 4096;
/// Residual bound `|𝓘(h*) - k f'/f(h*)|` at reported critical points.
pub const TOL_CRIT: f64 = 1e-9;
/// Growth-rate threshold for the unbounded-warping verdict.
pub const TOL_GROWTH: f64 = 1e-6;
/// Roots closer than this are merged.
const ROOT_MERGE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub h: f64,
    /// `𝓘(h) = μ(h)/I(h)`.
    pub iso: f64,
    /// Companion curve `k·f'(h)/f(h)`.
    pub growth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub h: f64,
    /// `𝓘(h*)`, which equals the growth rate there.
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaSource {
    FirstCriticalValue,
    LimitGrowth,
    Unavailable,
}

impl OmegaSource {
    pub fn name(self) -> &'static str {
        match self {
            OmegaSource::FirstCriticalValue => "first_critical_value",
            OmegaSource::LimitGrowth => "limit_nf_over_f",
            OmegaSource::Unavailable => "unavailable",
        }
    }
}

/// Positive lower bound for the profile, with its provenance.
#[derive(Debug, Clone, Copy)]
pub struct Omega {
    pub value: f64,
    pub source: OmegaSource,
    /// True when the value is a finite-window plateau estimate of the growth
    /// limit rather than a critical value or a user-declared limit.
    pub estimated: bool,
}

/// Profile samples plus critical structure over one window.
#[derive(Debug, Clone)]
pub struct DidoProfile {
    pub samples: Vec<ProfileSample>,
    pub critical_points: Vec<CriticalPoint>,
    pub omega: Option<Omega>,
    pub unbounded: bool,
    /// Smallest sampled profile value, as a cross-check on `omega`.
    pub min_sample: Option<ProfileSample>,
}

/// Evenly sample `𝓘` and the growth rate on `[h_min, h_max]`.
pub fn profile(m: &MuIntegral, h_min: f64, h_max: f64, count: usize) -> Result<Vec<ProfileSample>> {
    check_window(m, h_min, h_max)?;
    if count < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 samples, got {count}")));
    }
    let step = (h_max - h_min) / (count - 1) as f64;
    let mut samples = Vec::with_capacity(count);
    for i in 0..count {
        let h = if i + 1 == count { h_max } else { h_min + i as f64 * step };
        samples.push(ProfileSample { h, iso: iso_at(m, h)?, growth: m.growth(h)? });
    }
    Ok(samples)
}

fn check_window(m: &MuIntegral, h_min: f64, h_max: f64) -> Result<()> {
    let dm = m.domain_max();
    if h_min.is_nan() || h_min <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "window must start above 0 (the profile blows up as h → 0), got {h_min}"
        )));
    }
    if h_max.is_nan() || h_min >= h_max || h_max > dm * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "window [{h_min}, {h_max}] must be increasing and inside (0, {dm}]"
        )));
    }
    Ok(())
}

fn iso_at(m: &MuIntegral, h: f64) -> Result<f64> {
    Ok(m.mu(h)? / m.integral(h)?)
}

/// All roots of `d(h) = k f'/f - 𝓘` in the window: sign-change bracketing on
/// a dense grid refined by bisection. An empty list is a valid result.
pub fn critical_points(m: &MuIntegral, h_min: f64, h_max: f64) -> Result<Vec<CriticalPoint>> {
    critical_points_with_grid(m, h_min, h_max, DEFAULT_CRIT_GRID)
}

pub fn critical_points_with_grid(
    m: &MuIntegral,
    h_min: f64,
    h_max: f64,
    grid: usize,
) -> Result<Vec<CriticalPoint>> {
    check_window(m, h_min, h_max)?;
    if grid < 2 {
        return Err(Error::InvalidParameter(format!("scan grid needs at least 2 points, got {grid}")));
    }
    let gap = |h: f64| -> Result<f64> { Ok(m.growth(h)? - iso_at(m, h)?) };
    let step = (h_max - h_min) / (grid - 1) as f64;

    let mut roots: Vec<f64> = Vec::new();
    let mut prev_h = h_min;
    let mut prev_d = gap(prev_h)?;
    for i in 1..grid {
        let h = if i + 1 == grid { h_max } else { h_min + i as f64 * step };
        let d = gap(h)?;
        if prev_d == 0.0 {
            roots.push(prev_h);
        } else if prev_d.signum() != d.signum() && d != 0.0 {
            roots.push(bisect_root(&gap, prev_h, prev_d, h, d)?);
        }
        prev_h = h;
        prev_d = d;
    }
    if prev_d == 0.0 {
        roots.push(prev_h);
    }

    roots.dedup_by(|b, a| (*b - *a).abs() <= ROOT_MERGE);
    let mut points = Vec::with_capacity(roots.len());
    for h in roots {
        let value = iso_at(m, h)?;
        debug_assert!((m.growth(h)? - value).abs() <= TOL_CRIT, "critical residual too large");
        points.push(CriticalPoint { h, value });
    }
    Ok(points)
}

fn bisect_root(
    gap: &impl Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut d_lo: f64,
    mut hi: f64,
    _d_hi: f64,
) -> Result<f64> {
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let d = gap(mid)?;
        if d == 0.0 {
            return Ok(mid);
        }
        if d.signum() == d_lo.signum() {
            lo = mid;
            d_lo = d;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Finite-window verdict for "the warping function is unbounded above":
/// the growth rate stays at least [`TOL_GROWTH`] across the last decile of
/// the working interval and `f(domain_max) > 10·f(0)`. Approximate by
/// construction; a declared limit overrides it.
pub fn unbounded_growth(m: &MuIntegral) -> Result<bool> {
    let dm = m.domain_max();
    let samples = 64;
    for i in 0..=samples {
        let t = 0.9 * dm + (0.1 * dm) * i as f64 / samples as f64;
        if m.growth(t)? < TOL_GROWTH {
            return Ok(false);
        }
    }
    let (f0, _, _) = m.wf().eval2(0.0)?;
    let (fdm, _, _) = m.wf().eval2(dm)?;
    Ok(fdm > 10.0 * f0)
}

/// The positive lower bound `ω` for the profile: the first critical value if
/// any critical point exists, otherwise the declared growth limit, otherwise
/// a plateau estimate of the growth rate at the end of the window (flagged).
///
/// Requires the unbounded-growth verdict or a declared limit: by the
/// profile's construction a bounded warping function drives `𝓘` to zero and
/// no positive bound exists.
pub fn omega(m: &MuIntegral, declared_limit: Option<f64>) -> Result<Omega> {
    let unbounded = unbounded_growth(m)?;
    if !unbounded && declared_limit.is_none() {
        return Err(Error::BoundedWarping);
    }
    let dm = m.domain_max();
    let crit = critical_points(m, dm / DEFAULT_CRIT_GRID as f64, dm)?;
    let omega = if let Some(first) = crit.first() {
        Omega { value: first.value, source: OmegaSource::FirstCriticalValue, estimated: false }
    } else if let Some(limit) = declared_limit {
        Omega { value: limit, source: OmegaSource::LimitGrowth, estimated: false }
    } else {
        Omega { value: m.growth(dm)?, source: OmegaSource::LimitGrowth, estimated: true }
    };
    if omega.value.is_nan() || omega.value <= 0.0 {
        return Err(Error::NonPositiveOmega(omega.value));
    }
    Ok(omega)
}

/// Assemble samples, critical points, and `ω` over one window.
pub fn compute_profile(
    m: &MuIntegral,
    h_min: f64,
    h_max: f64,
    count: usize,
    declared_limit: Option<f64>,
) -> Result<DidoProfile> {
    let samples = profile(m, h_min, h_max, count)?;
    let critical = critical_points(m, h_min, h_max)?;
    let unbounded = unbounded_growth(m)?;
    let omega = match omega(m, declared_limit) {
        Ok(o) => Some(o),
        Err(Error::BoundedWarping) => None,
        Err(e) => return Err(e),
    };
    let min_sample = samples
        .iter()
        .copied()
        .min_by(|a, b| a.iso.total_cmp(&b.iso));
    Ok(DidoProfile { samples, critical_points: critical, omega, unbounded, min_sample })
}

/// One instance of the volume bound `Vol(R) ≤ Vol(C)/ω`.
#[derive(Debug, Clone, Copy)]
pub struct VolumeBound {
    pub vol_room: f64,
    pub vol_ceiling: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Check `vol_room ≤ vol_ceiling/ω + tol` with vertical ceiling area.
pub fn volume_bound_check(
    floor: &Floor,
    ceiling: &Ceiling,
    m: &MuIntegral,
    omega_value: f64,
    tol: f64,
) -> Result<VolumeBound> {
    if omega_value.is_nan() || omega_value <= 0.0 {
        return Err(Error::NonPositiveOmega(omega_value));
    }
    let vol_room = room_volume(floor, ceiling, m)?;
    let vol_ceiling = ceiling_area(floor, ceiling, m, AreaMode::Vertical)?;
    let bound = vol_ceiling / omega_value;
    Ok(VolumeBound { vol_room, vol_ceiling, bound, ok: vol_room <= bound + tol })
}

/// Solution of the fixed-area problem `Vol(F)·f(h)^k = A`.
#[derive(Debug, Clone)]
pub struct DidoSolution {
    /// All heights attaining the prescribed area, sorted (at most two, since
    /// `μ` is convex on the window).
    pub solutions: Vec<f64>,
    /// The solution whose room has the larger `(1+k)`-volume.
    pub chosen: f64,
    pub vol_room: f64,
}

/// Maximize trapped volume for a prescribed constant-ceiling area: solve
/// `Vol(F)·μ(h) = A` on `[0, domain_max]` and keep the solution with the
/// larger room.
pub fn solve_max_room(floor: &Floor, m: &MuIntegral, target_area: f64) -> Result<DidoSolution> {
    if !(target_area.is_finite() && target_area > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "target ceiling area must be positive, got {target_area}"
        )));
    }
    let dm = m.domain_max();
    let vol_floor = floor.volume();
    let target = target_area / vol_floor;

    let mu0 = m.mu(0.0)?;
    let mu_end = m.mu(dm)?;
    // μ is convex (log-convex f), so f' changes sign at most once and the
    // minimum sits where it does.
    let arg_min = {
        let slope = |t: f64| -> Result<f64> { Ok(m.wf().eval2(t)?.1) };
        let s0 = slope(0.0)?;
        let s_end = slope(dm)?;
        if s0 >= 0.0 {
            0.0
        } else if s_end <= 0.0 {
            dm
        } else {
            let mut lo = 0.0;
            let mut hi = dm;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if slope(mid)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    };
    let mu_min = m.mu(arg_min)?;

    let scale = mu0.max(mu_end).max(1.0);
    if mu0.max(mu_end) - mu_min <= 1e-12 * scale {
        // Constant μ: the equation holds for every h or for none.
        return if (target - mu_min).abs() <= 1e-9 * scale {
            Err(Error::DegenerateEquation)
        } else {
            Err(Error::NoSolution { target: target_area, domain_max: dm })
        };
    }
    if target < mu_min - 1e-12 * scale || target > mu0.max(mu_end) + 1e-12 * scale {
        return Err(Error::NoSolution { target: target_area, domain_max: dm });
    }
    // A target inside the tolerance band below the minimum touches it.
    let target = target.max(mu_min);

    let mut solutions = Vec::new();
    // Decreasing branch [0, arg_min].
    if arg_min > 0.0 && target <= mu0 && target >= mu_min {
        solutions.push(bisect_monotone(m, 0.0, arg_min, target, false)?);
    }
    // Increasing branch [arg_min, domain_max].
    if arg_min < dm && target <= mu_end && target >= mu_min {
        solutions.push(bisect_monotone(m, arg_min, dm, target, true)?);
    }
    solutions.sort_by(f64::total_cmp);
    solutions.dedup_by(|b, a| (*b - *a).abs() <= ROOT_MERGE);
    if solutions.is_empty() {
        return Err(Error::NoSolution { target: target_area, domain_max: dm });
    }

    let mut chosen = solutions[0];
    let mut best_volume = vol_floor * m.integral(chosen)?;
    for &h in &solutions[1..] {
        let volume = vol_floor * m.integral(h)?;
        if volume > best_volume {
            chosen = h;
            best_volume = volume;
        }
    }
    Ok(DidoSolution { solutions, chosen, vol_room: best_volume })
}

fn bisect_monotone(
    m: &MuIntegral,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    increasing: bool,
) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = m.mu(mid)?;
        let below = if increasing { v < target } else { v > target };
        if below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Snap to an endpoint when the target is attained there exactly.
    let (v_lo, v_hi) = (m.mu(lo)?, m.mu(hi)?);
    Ok(if (v_lo - target).abs() <= (v_hi - target).abs() { lo } else { hi })
}
