//! The constant-height comparison: among all ceilings trapping a given
//! volume over a floor, the constant-height one minimizes the vertical
//! component of area when the warping function is log-convex.
//!
//! `verify` computes the equal-volume constant height `H`, compares the
//! constant ceiling's area against the given ceiling's vertical area, and
//! diagnoses the equality cases. `calibration_check` validates the same
//! inequality through an independent route: the divergence theorem applied
//! to the unit horizontal field, whose divergence is `k·(log f)'`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geom::{cell_means, ceiling_area, room_volume, AreaMode, Ceiling, Floor};
use crate::numeric::pairwise_sum;
use crate::quad::{adaptive_quad, MuIntegral};
use crate::warpfn::CertificationReport;

/// Margin tolerance: computed margins below `-TOL_VERIFY` are treated as
/// verification failures rather than numerical noise.
pub const DEFAULT_TOL_VERIFY: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equality {
    /// Margin is genuinely positive.
    None,
    /// The ceiling is (up to tolerance) the constant ceiling itself.
    ExactConstant,
    /// Zero margin forced by a warping function that is nowhere strictly
    /// log-convex on the certification grid (log-linear family).
    LogLinearEquality,
}

impl Equality {
    pub fn name(self) -> &'static str {
        match self {
            Equality::None => "none",
            Equality::ExactConstant => "exact_constant",
            Equality::LogLinearEquality => "log_linear_equality",
        }
    }
}

/// Everything `verify` measures about one floor/ceiling instance.
#[derive(Debug, Clone)]
pub struct IsoperimetricReport {
    pub vol_room: f64,
    pub vol_floor: f64,
    /// Height of the constant ceiling trapping the same volume.
    pub constant_height: f64,
    /// `vol_floor · μ(H)`: area of the constant ceiling.
    pub vol_constant: f64,
    /// Vertical (gradient-free) area of the given ceiling.
    pub vol_vertical: f64,
    /// Induced-metric area, when the floor carries a grid.
    pub vol_full: Option<f64>,
    /// `vol_vertical - vol_constant`; nonnegative up to tolerance whenever
    /// the warping function certifies log-convex.
    pub margin: f64,
    pub equality: Equality,
    pub log_convex: bool,
    pub strictly_log_convex: bool,
}

/// Height `H` of the constant ceiling over `floor` whose room volume matches
/// the given ceiling's: `H = I⁻¹(vol_room / vol_floor)`.
pub fn solve_constant_height(floor: &Floor, ceiling: &Ceiling, m: &MuIntegral) -> Result<f64> {
    let vol_room = room_volume(floor, ceiling, m)?;
    m.invert(vol_room / floor.volume())
}

pub fn verify(floor: &Floor, ceiling: &Ceiling, m: &MuIntegral) -> Result<IsoperimetricReport> {
    let cert = m.wf().certify_default()?;
    verify_with(floor, ceiling, m, &cert, DEFAULT_TOL_VERIFY)
}

pub fn verify_with(
    floor: &Floor,
    ceiling: &Ceiling,
    m: &MuIntegral,
    cert: &CertificationReport,
    tol_verify: f64,
) -> Result<IsoperimetricReport> {
    let vol_room = room_volume(floor, ceiling, m)?;
    let vol_floor = floor.volume();
    let constant_height = m.invert(vol_room / vol_floor)?;
    let vol_constant = vol_floor * m.mu(constant_height)?;
    let vol_vertical = ceiling_area(floor, ceiling, m, AreaMode::Vertical)?;
    let vol_full = if floor.is_grid() {
        Some(ceiling_area(floor, ceiling, m, AreaMode::Full)?)
    } else {
        None
    };
    let margin = vol_vertical - vol_constant;
    let mut report = IsoperimetricReport {
        vol_room,
        vol_floor,
        constant_height,
        vol_constant,
        vol_vertical,
        vol_full,
        margin,
        equality: Equality::None,
        log_convex: cert.log_convex,
        strictly_log_convex: cert.strictly_log_convex,
    };
    report.equality = diagnose_equality(&report, ceiling, cert, tol_verify);
    Ok(report)
}

/// Classify how the inequality closed.
///
/// `ExactConstant` when every height equals `H` up to tolerance (the ceiling
/// *is* the constant ceiling, whether stored as a step or a linear field);
/// `LogLinearEquality` when the margin vanished because the warping function
/// is nowhere strictly log-convex; `None` otherwise.
pub fn diagnose_equality(
    report: &IsoperimetricReport,
    ceiling: &Ceiling,
    cert: &CertificationReport,
    tol_verify: f64,
) -> Equality {
    let h = report.constant_height;
    let height_tol = tol_verify * (1.0 + h.abs());
    if ceiling.heights().iter().all(|v| (v - h).abs() <= height_tol) {
        return Equality::ExactConstant;
    }
    if report.margin <= tol_verify && !cert.strictly_log_convex {
        return Equality::LogLinearEquality;
    }
    Equality::None
}

/// Both sides of the divergence-theorem identity for one room.
#[derive(Debug, Clone, Copy)]
pub struct Calibration {
    /// `∫_B div X dV` over the constant-height room.
    pub constant_room_divergence: f64,
    /// Flux through the constant room's boundary: `Vol(S) - Vol(F)`.
    pub constant_room_flux: f64,
    /// `|divergence - flux|` for the constant room.
    pub gap: f64,
    /// `∫_R div X dV` over the given room.
    pub room_divergence: f64,
    /// Vertical flux for the given room: `Vol_C(vertical) - Vol(F)`.
    pub room_flux: f64,
    pub room_gap: f64,
    /// `room_divergence - constant_room_divergence`; nonnegative when the
    /// warping function is log-convex, because `div X = k·(log f)'` is then
    /// nondecreasing in the height.
    pub chain_slack: f64,
}

/// Evaluate `∫ div X dV` and the boundary flux independently for both the
/// given room and its equal-volume constant room.
///
/// The divergence side integrates `k·(log f)'(t)·μ(t)` in `t` over each
/// cell's height by adaptive quadrature; the flux side is pure geometry
/// (ceiling area minus floor area). With `f(0) = 1` the two sides agree up
/// to quadrature error.
pub fn calibration_check(floor: &Floor, ceiling: &Ceiling, m: &MuIntegral) -> Result<Calibration> {
    let vol_floor = floor.volume();
    let constant_height = solve_constant_height(floor, ceiling, m)?;

    let divergence_to = |h: f64| -> Result<f64> {
        if h <= 0.0 {
            return Ok(0.0);
        }
        adaptive_quad(&|t| m.mu_derivative(t), 0.0, h, 0.25 * m.tol_quad(), 2048)
    };

    let constant_room_divergence = vol_floor * divergence_to(constant_height)?;
    let vol_constant = vol_floor * m.mu(constant_height)?;
    let constant_room_flux = vol_constant - vol_floor;

    let means = cell_means(floor, ceiling, divergence_to)?;
    let terms: Vec<f64> = floor.weights().iter().zip(&means).map(|(w, v)| w * v).collect();
    let room_divergence = pairwise_sum(&terms);
    let vol_vertical = ceiling_area(floor, ceiling, m, AreaMode::Vertical)?;
    let room_flux = vol_vertical - vol_floor;

    Ok(Calibration {
        constant_room_divergence,
        constant_room_flux,
        gap: (constant_room_divergence - constant_room_flux).abs(),
        room_divergence,
        room_flux,
        room_gap: (room_divergence - room_flux).abs(),
        chain_slack: room_divergence - constant_room_divergence,
    })
}

/// Step heights drawn i.i.d. uniform on `[0, 0.8·domain_max]` from a seeded
/// generator, so batches are reproducible from the recorded seed.
pub fn random_step_heights(seed: u64, cells: usize, domain_max: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cells).map(|_| rng.random::<f64>() * 0.8 * domain_max).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warpfn::WarpingFunction;

    fn mu(src: &str, k: u32, dm: f64) -> MuIntegral {
        MuIntegral::new(WarpingFunction::parse(src, dm).unwrap(), k).unwrap()
    }

    #[test]
    fn euclidean_constant_height_is_the_weighted_mean() {
        let m = mu("1", 1, 10.0);
        let floor = Floor::weighted_cells(vec![1.0, 3.0], 1, 0.0).unwrap();
        let ceiling = Ceiling::step(vec![2.0, 1.0]).unwrap();
        let h = solve_constant_height(&floor, &ceiling, &m).unwrap();
        assert!((h - (1.0 * 2.0 + 3.0 * 1.0) / 4.0).abs() < 1e-10);
    }

    #[test]
    fn exponential_constant_height_closed_form() {
        let m = mu("exp(t)", 1, 10.0);
        let floor = Floor::weighted_cells(vec![1.0, 1.0], 1, 0.0).unwrap();
        let h = 1.3;
        let ceiling = Ceiling::step(vec![0.0, h]).unwrap();
        let got = solve_constant_height(&floor, &ceiling, &m).unwrap();
        let expected = ((1.0 + h.exp()) / 2.0).ln();
        assert!((got - expected).abs() < 1e-10);
    }

    #[test]
    fn cosh_constant_height_closed_form() {
        let m = mu("cosh(t)", 1, 10.0);
        let floor = Floor::weighted_cells(vec![1.0, 1.0], 1, 0.0).unwrap();
        let ceiling = Ceiling::step(vec![0.0, 1.0]).unwrap();
        let got = solve_constant_height(&floor, &ceiling, &m).unwrap();
        let expected = (1.0f64.sinh() / 2.0).asinh();
        assert!((got - expected).abs() < 1e-10);
    }

    #[test]
    fn euclidean_margin_is_zero_with_log_linear_equality() {
        let m = mu("1", 1, 10.0);
        let floor = Floor::interval(2.0, 4, 0.0, m.wf()).unwrap();
        let ceiling = Ceiling::step(vec![0.1, 2.3, 1.0, 0.0]).unwrap();
        let report = verify(&floor, &ceiling, &m).unwrap();
        assert!((report.vol_constant - 2.0).abs() < 1e-10);
        assert!((report.vol_vertical - 2.0).abs() < 1e-12);
        assert!(report.margin.abs() < 1e-10);
        assert_eq!(report.equality, Equality::LogLinearEquality);
    }

    #[test]
    fn exponential_margin_is_zero_by_affine_composition() {
        // μ∘I⁻¹(x) = x + 1 for f = e^t, so the averaging step is tight.
        let m = mu("exp(t)", 1, 10.0);
        let floor = Floor::weighted_cells(vec![1.0, 1.0], 1, 0.0).unwrap();
        let h = 2.0;
        let ceiling = Ceiling::step(vec![0.0, h]).unwrap();
        let report = verify(&floor, &ceiling, &m).unwrap();
        let per_unit = (1.0 + h.exp()) / 2.0;
        assert!((report.vol_vertical / 2.0 - per_unit).abs() < 1e-12);
        assert!((report.vol_constant / 2.0 - per_unit).abs() < 1e-9);
        assert!(report.margin.abs() < 1e-9);
        assert_eq!(report.equality, Equality::LogLinearEquality);
    }

    #[test]
    fn cosh_margin_is_strictly_positive() {
        let m = mu("cosh(t)", 1, 10.0);
        let floor = Floor::weighted_cells(vec![1.0, 1.0], 1, 0.0).unwrap();
        let ceiling = Ceiling::step(vec![0.0, 1.0]).unwrap();
        let report = verify(&floor, &ceiling, &m).unwrap();
        let per_unit_vertical = (1.0 + 1.0f64.cosh()) / 2.0;
        let h = (1.0f64.sinh() / 2.0).asinh();
        let per_unit_constant = h.cosh();
        assert!((report.vol_vertical / 2.0 - per_unit_vertical).abs() < 1e-12);
        assert!((report.vol_constant / 2.0 - per_unit_constant).abs() < 1e-10);
        assert!(report.margin > 1e-3);
        assert_eq!(report.equality, Equality::None);
        assert!(report.strictly_log_convex);
    }

    #[test]
    fn constant_ceiling_diagnoses_exact_constant() {
        let m = mu("cosh(t)", 1, 10.0);
        let floor = Floor::interval(1.5, 3, 0.0, m.wf()).unwrap();
        let ceiling = Ceiling::constant(0.8, 3).unwrap();
        let report = verify(&floor, &ceiling, &m).unwrap();
        assert_eq!(report.equality, Equality::ExactConstant);
        assert!(report.margin.abs() < 1e-10);
    }

    #[test]
    fn full_area_reported_on_grids_only() {
        let m = mu("cosh(t)", 1, 10.0);
        let grid_floor = Floor::interval(1.0, 4, 0.0, m.wf()).unwrap();
        let ceiling = Ceiling::step(vec![0.2, 0.4, 0.1, 0.9]).unwrap();
        assert!(verify(&grid_floor, &ceiling, &m).unwrap().vol_full.is_some());
        let abstract_floor = Floor::weighted_cells(vec![1.0; 4], 1, 0.0).unwrap();
        assert!(verify(&abstract_floor, &ceiling, &m).unwrap().vol_full.is_none());
    }

    #[test]
    fn calibration_trivial_for_unit_warping() {
        let m = mu("1", 1, 10.0);
        let floor = Floor::interval(1.0, 2, 0.0, m.wf()).unwrap();
        let ceiling = Ceiling::step(vec![0.5, 1.5]).unwrap();
        let cal = calibration_check(&floor, &ceiling, &m).unwrap();
        assert!(cal.constant_room_divergence.abs() < 1e-12);
        assert!(cal.constant_room_flux.abs() < 1e-12);
        assert!(cal.room_divergence.abs() < 1e-12);
    }

    #[test]
    fn calibration_exponential_closed_form() {
        // div X = 1 for f = e^t, k = 1, so ∫_B div X dV over the constant
        // room of height h is ∫₀ʰ e^t dt = e^h - 1 = Vol(S) - Vol(F).
        let m = mu("exp(t)", 1, 10.0);
        let floor = Floor::interval(1.0, 1, 0.0, m.wf()).unwrap();
        let h = 1.1;
        let ceiling = Ceiling::constant(h, 1).unwrap();
        let cal = calibration_check(&floor, &ceiling, &m).unwrap();
        let expected = h.exp() - 1.0;
        assert!((cal.constant_room_divergence - expected).abs() < 1e-9);
        assert!((cal.constant_room_flux - expected).abs() < 1e-9);
        assert!(cal.gap < 1e-9);
    }

    #[test]
    fn calibration_cosh_closed_form() {
        // ∫₀¹ tanh(t)·cosh(t) dt = cosh(1) - 1.
        let m = mu("cosh(t)", 1, 10.0);
        let floor = Floor::interval(1.0, 1, 0.0, m.wf()).unwrap();
        let ceiling = Ceiling::constant(1.0, 1).unwrap();
        let cal = calibration_check(&floor, &ceiling, &m).unwrap();
        let expected = 1.0f64.cosh() - 1.0;
        assert!((cal.constant_room_divergence - expected).abs() < 1e-9);
        assert!((cal.constant_room_flux - expected).abs() < 1e-9);
        assert!(cal.gap < 1e-9);
        assert!(cal.chain_slack >= -1e-10);
    }

    #[test]
    fn calibration_respects_the_dimension_factor() {
        // For k = 2 the divergence density is 2·(log f)'·μ; over a constant
        // room of height h with f = cosh this integrates to
        // ∫₀ʰ 2 sinh·cosh = cosh²h - 1 = μ(h) - 1, balancing the flux.
        // Without the factor k the interior side would be off by half.
        let m = mu("cosh(t)", 2, 10.0);
        let floor = Floor::weighted_cells(vec![1.0], 2, 0.0).unwrap();
        let h = 0.9f64;
        let ceiling = Ceiling::constant(h, 1).unwrap();
        let cal = calibration_check(&floor, &ceiling, &m).unwrap();
        let expected = h.cosh() * h.cosh() - 1.0;
        assert!((cal.constant_room_divergence - expected).abs() < 1e-9);
        assert!((cal.constant_room_flux - expected).abs() < 1e-9);
        assert!(cal.gap < 1e-9);
    }

    #[test]
    fn calibration_chain_on_nonconstant_ceiling() {
        let m = mu("cosh(t)", 1, 10.0);
        let floor = Floor::weighted_cells(vec![0.5, 1.5, 1.0], 1, 0.0).unwrap();
        let ceiling = Ceiling::step(vec![0.0, 2.0, 0.7]).unwrap();
        let cal = calibration_check(&floor, &ceiling, &m).unwrap();
        assert!(cal.gap < 1e-9);
        assert!(cal.room_gap < 1e-9);
        assert!(cal.chain_slack >= -1e-10);
    }

    #[test]
    fn scale_equivariance() {
        let m = mu("cosh(t)", 1, 10.0);
        let floor = Floor::weighted_cells(vec![0.5, 1.5, 1.0], 1, 0.0).unwrap();
        let ceiling = Ceiling::step(vec![0.3, 1.2, 0.9]).unwrap();
        let base = verify(&floor, &ceiling, &m).unwrap();
        let doubled = verify(&floor.scaled(2.0).unwrap(), &ceiling, &m).unwrap();
        assert!((doubled.vol_room - 2.0 * base.vol_room).abs() < 1e-9);
        assert!((doubled.vol_constant - 2.0 * base.vol_constant).abs() < 1e-9);
        assert!((doubled.vol_vertical - 2.0 * base.vol_vertical).abs() < 1e-9);
        assert!((doubled.constant_height - base.constant_height).abs() < 1e-9);
        assert!(
            (doubled.margin / doubled.vol_floor - base.margin / base.vol_floor).abs() < 1e-9
        );
    }

    #[test]
    fn random_heights_are_reproducible_and_in_range() {
        let a = random_step_heights(42, 16, 5.0);
        let b = random_step_heights(42, 16, 5.0);
        assert_eq!(a, b);
        assert!(a.iter().all(|h| (0.0..4.0).contains(h)));
        let c = random_step_heights(43, 16, 5.0);
        assert_ne!(a, c);
    }

    mod margin_property {
        use super::*;
        use proptest::prelude::*;
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn log_convex_family_has_nonnegative_margin(
                a in 0.0f64..1.0,
                b in -1.0f64..2.0,
                seed in 0u64..1_000,
                cells in 1usize..9,
            ) {
                let src = format!("exp(({a:?})*t^2 + ({b:?})*t)");
                let m = mu(&src, 1, 3.0);
                let weights: Vec<f64> = {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfeed);
                    (0..cells).map(|_| 0.1 + 1.9 * rng.random::<f64>()).collect()
                };
                let floor = Floor::weighted_cells(weights, 1, 0.0).unwrap();
                let heights = random_step_heights(seed, cells, 3.0);
                let ceiling = Ceiling::step(heights).unwrap();
                let report = verify(&floor, &ceiling, &m).unwrap();
                prop_assert!(report.log_convex);
                prop_assert!(report.margin >= -1e-8, "margin {}", report.margin);
                if a == 0.0 {
                    prop_assert!(report.margin.abs() <= 1e-9);
                }
            }
        }
    }
}
