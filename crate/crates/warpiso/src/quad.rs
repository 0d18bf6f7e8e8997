//! One-dimensional adaptive quadrature of the vertical area density
//! `μ(t) = f(t)^k` and inversion of the trapped-volume function
//! `I(h) = ∫₀ʰ μ(t) dt`.
//!
//! The integrator is a worst-interval-first Gauss–Kronrod 7/15 refinement.
//! Tolerances are absolute by default; a machine-relative floor keeps the
//! refinement from stalling when `μ` grows like `e^{k t²}` and the integral
//! leaves the range where an absolute target is representable.

use std::collections::BinaryHeap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::warpfn::WarpingFunction;

/// Default absolute quadrature tolerance.
pub const DEFAULT_TOL_QUAD: f64 = 1e-10;
/// Relative error floor: no refinement target below `REL_FLOOR · |value|`.
/// Must sit above the kernel's own estimate floor of `50·ε·resabs`, or
/// integrals too large for the absolute tolerance would never terminate.
const REL_FLOOR: f64 = 1e-13;
/// Default cap on the number of refined subintervals per integral.
const DEFAULT_SEGMENT_BUDGET: usize = 2048;
/// Cache growth stops here; lookups still work.
const CACHE_CAP: usize = 8192;

/// `μ(t) = f(t)^k` with its integral `I` and inverse `I⁻¹` on the working
/// interval `[0, domain_max]`.
///
/// `I` is strictly increasing because `μ > 0`, so the inverse is defined on
/// `[0, I(domain_max)]`. Computed `(h, I(h))` pairs are cached behind a mutex
/// and used as initial brackets for inversion; all operations are logically
/// pure.
///
/// ```
/// use warpiso::{MuIntegral, WarpingFunction};
///
/// let m = MuIntegral::new(WarpingFunction::parse("cosh(t)", 10.0)?, 1)?;
/// assert!((m.integral(1.0)? - 1.0f64.sinh()).abs() < 1e-10);
/// assert!((m.invert(1.0f64.sinh())? - 1.0).abs() < 1e-9);
/// # Ok::<(), warpiso::Error>(())
/// ```
#[derive(Debug)]
pub struct MuIntegral {
    wf: WarpingFunction,
    k: u32,
    tol_quad: f64,
    segment_budget: usize,
    cache: Mutex<Vec<(f64, f64)>>,
}

impl MuIntegral {
    pub fn new(wf: WarpingFunction, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("fiber dimension k must be at least 1".into()));
        }
        Ok(MuIntegral {
            wf,
            k,
            tol_quad: DEFAULT_TOL_QUAD,
            segment_budget: DEFAULT_SEGMENT_BUDGET,
            cache: Mutex::new(Vec::new()),
        })
    }

    pub fn with_tol_quad(mut self, tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol_quad must be positive, got {tol}")));
        }
        self.tol_quad = tol;
        Ok(self)
    }

    pub fn with_segment_budget(mut self, budget: usize) -> Self {
        self.segment_budget = budget.max(1);
        self
    }

    pub fn wf(&self) -> &WarpingFunction {
        &self.wf
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn domain_max(&self) -> f64 {
        self.wf.domain_max()
    }

    pub fn tol_quad(&self) -> f64 {
        self.tol_quad
    }

    /// Vertical area density `μ(t) = f(t)^k`, evaluated as the k-th power of
    /// the exact `f` value.
    pub fn mu(&self, t: f64) -> Result<f64> {
        let (f, _, _) = self.wf.eval2(t)?;
        let value = f.powi(self.k as i32);
        if !value.is_finite() {
            return Err(Error::Domain {
                subexpr: self.wf.unparse(),
                t,
                message: "mu overflowed to a non-finite value",
            });
        }
        Ok(value)
    }

    /// `k · (log f)'(t) · μ(t)`, the derivative of `μ`. Doubles as the
    /// divergence density used by the calibration identity.
    pub fn mu_derivative(&self, t: f64) -> Result<f64> {
        let (f, d1, _) = self.wf.eval2(t)?;
        Ok(self.k as f64 * d1 * f.powi(self.k as i32 - 1))
    }

    /// Growth rate `k · f'(t)/f(t)` of `log μ`.
    pub fn growth(&self, t: f64) -> Result<f64> {
        let (f, d1, _) = self.wf.eval2(t)?;
        Ok(self.k as f64 * d1 / f)
    }

    /// Trapped volume per unit floor: `I(h) = ∫₀ʰ μ(t) dt`, with
    /// `I(0) = 0` exactly.
    pub fn integral(&self, h: f64) -> Result<f64> {
        let dm = self.domain_max();
        let slack = 1e-12 * dm.max(1.0);
        if !((-slack..=dm + slack).contains(&h)) {
            return Err(Error::Range { quantity: "height", value: h, max: dm });
        }
        if h <= 0.0 {
            return Ok(0.0);
        }
        let h = h.min(dm);
        let value = self.adaptive(0.0, h)?;
        self.cache_insert(h, value);
        Ok(value)
    }

    /// `∫ₐᵇ μ(t) dt` for `0 ≤ a ≤ b ≤ domain_max`.
    pub fn integral_between(&self, a: f64, b: f64) -> Result<f64> {
        let dm = self.domain_max();
        let slack = 1e-12 * dm.max(1.0);
        for (name, v) in [("lower quadrature bound", a), ("upper quadrature bound", b)] {
            if !((-slack..=dm + slack).contains(&v)) {
                return Err(Error::Range { quantity: name, value: v, max: dm });
            }
        }
        if b <= a {
            if a - b > slack {
                return Err(Error::InvalidParameter(format!(
                    "quadrature bounds out of order: {a} > {b}"
                )));
            }
            return Ok(0.0);
        }
        self.adaptive(a.max(0.0), b.min(dm))
    }

    /// Invert `I`: find `h` with `I(h) = target`.
    ///
    /// Starts from the tightest bracket the cache provides, then runs
    /// safeguarded Newton steps using `I' = μ > 0`, falling back onto
    /// bisection whenever a step leaves the bracket. Iterates to machine-level
    /// residuals, well inside the documented bound
    /// `|I(h) - target| ≤ tol_quad · (1 + |target|)`.
    pub fn invert(&self, target: f64) -> Result<f64> {
        let dm = self.domain_max();
        let max_value = self.integral(dm)?;
        let slack = self.tol_quad * (1.0 + target.abs());
        if target < -slack || target > max_value + slack.max(1e-12 * max_value) {
            return Err(Error::Range {
                quantity: "inversion target",
                value: target,
                max: max_value,
            });
        }
        if target <= 0.0 {
            return Ok(0.0);
        }
        if target >= max_value {
            return Ok(dm);
        }

        let (mut lo, mut hi) = self.cache_bracket(target, dm, max_value);
        let accept = 32.0 * f64::EPSILON * (1.0 + target.abs());
        let mut x = 0.5 * (lo + hi);
        let mut best = (f64::INFINITY, x);
        for _ in 0..200 {
            let ix = self.integral(x)?;
            let residual = ix - target;
            if residual.abs() < best.0 {
                best = (residual.abs(), x);
            }
            if residual.abs() <= accept {
                return Ok(x);
            }
            if residual > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
                // Bracket collapsed to machine width; the residual is limited
                // by quadrature accuracy, not by the iteration.
                return Ok(best.1);
            }
            let newton = x - residual / self.mu(x)?;
            x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        if best.0 <= self.tol_quad * (1.0 + target.abs()) {
            return Ok(best.1);
        }
        Err(Error::Convergence { achieved: best.0, requested: self.tol_quad })
    }

    fn cache_insert(&self, h: f64, value: f64) {
        let mut cache = self.cache.lock().expect("cache poisoned");
        if cache.len() >= CACHE_CAP {
            return;
        }
        match cache.binary_search_by(|(hh, _)| hh.total_cmp(&h)) {
            Ok(_) => {}
            Err(idx) => cache.insert(idx, (h, value)),
        }
        debug_assert!(cache.windows(2).all(|w| w[0].1 <= w[1].1 + 1e-9 * (1.0 + w[1].1.abs())));
    }

    fn cache_bracket(&self, target: f64, dm: f64, max_value: f64) -> (f64, f64) {
        let cache = self.cache.lock().expect("cache poisoned");
        let mut lo = (0.0, 0.0);
        let mut hi = (dm, max_value);
        for &(h, v) in cache.iter() {
            if v <= target && h > lo.0 {
                lo = (h, v);
            }
            if v >= target && h < hi.0 {
                hi = (h, v);
            }
        }
        (lo.0, hi.0)
    }

    fn adaptive(&self, a: f64, b: f64) -> Result<f64> {
        // Refine to a quarter of the public tolerance so that sums and
        // differences of a couple of integrals stay within it.
        adaptive_quad(&|t| self.mu(t), a, b, 0.25 * self.tol_quad, self.segment_budget)
    }
}

// 15-point Kronrod abscissae on [-1, 1] (positive half; the rule is
// symmetric) with the embedded 7-point Gauss rule at the odd indices.
// Transcribed beyond f64 precision; the nearest double is what lands.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Kernel {
    value: f64,
    error: f64,
}

/// Gauss–Kronrod 7/15 on `[a, b]` with QUADPACK-style error rescaling.
fn gk15(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<Kernel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut below = [0.0; 7];
    let mut above = [0.0; 7];
    for i in 0..7 {
        below[i] = f(center - half * XGK[i])?;
        above[i] = f(center + half * XGK[i])?;
    }

    let mut gauss = WG[3] * fc;
    for j in 0..3 {
        gauss += WG[j] * (below[2 * j + 1] + above[2 * j + 1]);
    }
    let mut kronrod = WGK[7] * fc;
    let mut resabs = WGK[7] * fc.abs();
    for i in 0..7 {
        kronrod += WGK[i] * (below[i] + above[i]);
        resabs += WGK[i] * (below[i].abs() + above[i].abs());
    }
    let mean = 0.5 * kronrod;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for i in 0..7 {
        resasc += WGK[i] * ((below[i] - mean).abs() + (above[i] - mean).abs());
    }

    let value = kronrod * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * 1.0f64.min((200.0 * error / resasc).powf(1.5));
    }
    let tiny = f64::MIN_POSITIVE / (50.0 * f64::EPSILON);
    if resabs > tiny {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Kernel { value, error })
}

#[derive(Debug)]
struct Segment {
    error: f64,
    a: f64,
    b: f64,
    value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error && self.a == other.a
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Worst error first; ties broken by the left endpoint so the pop
        // order is fully determined.
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Adaptive bisection driven by a worst-first heap. The final value is
/// re-summed over segments sorted by position, so the result does not depend
/// on refinement history.
pub(crate) fn adaptive_quad(
    f: &dyn Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    tol_abs: f64,
    segment_budget: usize,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let first = gk15(f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { error: first.error, a, b, value: first.value });
    let mut total_value = first.value;
    let mut total_error = first.error;

    loop {
        let goal = tol_abs.max(REL_FLOOR * total_value.abs());
        if total_error <= goal {
            break;
        }
        if heap.len() >= segment_budget {
            return Err(Error::Convergence { achieved: total_error, requested: goal });
        }
        let worst = heap.pop().expect("heap nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Worst interval at machine width; nothing left to refine there.
            heap.push(worst);
            if total_error <= 10.0 * goal {
                break;
            }
            return Err(Error::Convergence { achieved: total_error, requested: goal });
        }
        let left = gk15(f, worst.a, mid)?;
        let right = gk15(f, mid, worst.b)?;
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(Segment { error: left.error, a: worst.a, b: mid, value: left.value });
        heap.push(Segment { error: right.error, a: mid, b: worst.b, value: right.value });
    }

    let mut segments: Vec<Segment> = heap.into_vec();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let values: Vec<f64> = segments.iter().map(|s| s.value).collect();
    Ok(pairwise_sum(&values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warpfn::WarpingFunction;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mu_integral(src: &str, k: u32, dm: f64) -> MuIntegral {
        MuIntegral::new(WarpingFunction::parse(src, dm).unwrap(), k).unwrap()
    }

    #[test]
    fn kronrod_weights_are_a_quadrature_rule() {
        // Both embedded rules integrate 1 over [-1, 1] to 2.
        let wks: f64 = WGK[7] + 2.0 * WGK[..7].iter().sum::<f64>();
        let wgs: f64 = WG[3] + 2.0 * WG[..3].iter().sum::<f64>();
        assert!((wks - 2.0).abs() < 1e-13, "kronrod weight sum {wks}");
        assert!((wgs - 2.0).abs() < 1e-13, "gauss weight sum {wgs}");
    }

    #[test]
    fn kernel_is_exact_on_polynomials() {
        // A 15-point Kronrod rule integrates degree ≤ 22 exactly.
        for deg in [3i32, 8, 13, 19, 22] {
            let f = move |x: f64| Ok(x.powi(deg));
            let got = gk15(&f, -1.0, 1.0).unwrap().value;
            let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (f64::from(deg) + 1.0) };
            assert!((got - want).abs() < 1e-13, "degree {deg}: {got} vs {want}");
        }
    }

    #[test]
    fn adaptive_handles_smooth_exponential() {
        let v = adaptive_quad(&|x| Ok(x.exp()), 0.0, 1.0, 1e-12, 256).unwrap();
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn mu_examples() {
        let m = mu_integral("cosh(t)", 1, 10.0);
        assert_eq!(m.mu(0.0).unwrap(), 1.0);

        let m2 = mu_integral("cosh(t)", 2, 10.0);
        let c = 1.0f64.cosh();
        assert!((m2.mu(1.0).unwrap() - c * c).abs() < 1e-15);

        let one = mu_integral("1", 3, 10.0);
        assert_eq!(one.mu(4.2).unwrap(), 1.0);
    }

    #[test]
    fn integral_matches_closed_forms() {
        let m = mu_integral("cosh(t)", 1, 10.0);
        assert_eq!(m.integral(0.0).unwrap(), 0.0);
        assert!((m.integral(1.0).unwrap() - 1.0f64.sinh()).abs() < 1e-10);

        let e = mu_integral("exp(t)", 1, 10.0);
        assert!((e.integral(1.0).unwrap() - (std::f64::consts::E - 1.0)).abs() < 1e-10);

        let one = mu_integral("1", 3, 10.0);
        assert!((one.integral(7.5).unwrap() - 7.5).abs() < 1e-12);
    }

    #[test]
    fn integral_rejects_heights_outside_the_interval() {
        let m = mu_integral("cosh(t)", 1, 2.0);
        assert!(matches!(m.integral(3.0), Err(Error::Range { .. })));
        assert!(matches!(m.integral(-1.0), Err(Error::Range { .. })));
    }

    #[test]
    fn invert_examples() {
        let m = mu_integral("cosh(t)", 1, 10.0);
        let h = m.invert(1.0f64.sinh()).unwrap();
        assert!((h - 1.0).abs() < 1e-9);
        assert_eq!(m.invert(0.0).unwrap(), 0.0);

        let e2 = mu_integral("exp(t)", 2, 10.0);
        let target = (2.0f64.exp() - 1.0) / 2.0; // I(h) = (e^{2h}-1)/2
        assert!((e2.invert(target).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn invert_range_error_above_max() {
        let m = mu_integral("cosh(t)", 1, 2.0);
        let max = m.integral(2.0).unwrap();
        assert!(matches!(m.invert(max * 1.01), Err(Error::Range { .. })));
    }

    #[test]
    fn round_trip_inversion() {
        for (src, k, dm) in [("cosh(t)", 1u32, 10.0), ("exp(t)", 2, 8.0), ("exp(t^2 - 2*sin(t))", 1, 5.0)] {
            let m = mu_integral(src, k, dm);
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..100 {
                let h = rng.random::<f64>() * dm;
                let back = m.invert(m.integral(h).unwrap()).unwrap();
                assert!((back - h).abs() <= 1e-8, "{src}: {h} -> {back}");
            }
        }
    }

    #[test]
    fn additivity_over_subintervals() {
        // Windows are sized so the absolute tolerance is representable
        // (values up to ~75, well inside 2·tol_quad of slack).
        for (src, dm) in [("cosh(t)", 5.0), ("exp(t^2 - 2*sin(t))", 2.0)] {
            let m = mu_integral(src, 1, dm);
            let tol = m.tol_quad();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..50 {
                let mut a = rng.random::<f64>() * dm;
                let mut b = rng.random::<f64>() * dm;
                if a > b {
                    std::mem::swap(&mut a, &mut b);
                }
                let lhs = m.integral(a).unwrap() + m.integral_between(a, b).unwrap();
                let rhs = m.integral(b).unwrap();
                assert!(
                    (lhs - rhs).abs() <= 2.0 * tol,
                    "{src}: additivity violated: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn composed_density_through_inverse_is_convex() {
        // For log-convex μ the map x ↦ μ(I⁻¹(x)) is convex; checked on
        // random alignment triples.
        for (src, k) in [("cosh(t)", 1u32), ("exp(t)", 1)] {
            let m = mu_integral(src, k, 5.0);
            let max = m.integral(5.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(29);
            for _ in 0..200 {
                let mut xs = [
                    rng.random::<f64>() * max,
                    rng.random::<f64>() * max,
                    rng.random::<f64>() * max,
                ];
                xs.sort_by(f64::total_cmp);
                let [x1, x2, x3] = xs;
                if x3 - x1 < 1e-9 {
                    continue;
                }
                let lambda = (x3 - x2) / (x3 - x1);
                let at = |x: f64| m.mu(m.invert(x).unwrap()).unwrap();
                let lhs = at(x2);
                let rhs = lambda * at(x1) + (1.0 - lambda) * at(x3);
                assert!(lhs <= rhs + 1e-8, "{src}: convexity violated: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn budget_exhaustion_reports_achieved_error() {
        let m = mu_integral("exp(t^2 - 2*sin(t))", 1, 10.0).with_segment_budget(2);
        match m.integral(10.0) {
            Err(Error::Convergence { achieved, .. }) => assert!(achieved > 0.0),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn integrals_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<MuIntegral>();
        assert_send_sync::<WarpingFunction>();

        let m = std::sync::Arc::new(mu_integral("cosh(t)", 1, 10.0));
        let handles: Vec<_> = (1..=4)
            .map(|i| {
                let m = std::sync::Arc::clone(&m);
                std::thread::spawn(move || m.invert(m.integral(i as f64).unwrap()).unwrap())
            })
            .collect();
        for (i, handle) in handles.into_iter().enumerate() {
            let h = handle.join().unwrap();
            assert!((h - (i + 1) as f64).abs() < 1e-8);
        }
    }

    #[test]
    fn cache_stays_monotone() {
        let m = mu_integral("cosh(t)", 1, 10.0);
        for h in [3.0, 1.0, 7.0, 0.5, 9.0, 2.0] {
            m.integral(h).unwrap();
        }
        let cache = m.cache.lock().unwrap();
        assert!(cache.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
    }
}
