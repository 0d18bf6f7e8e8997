//! Floors, ceilings, and the rooms between them.
//!
//! A floor is a finite-volume region of the vertical fiber at the base
//! height, stored as weighted cells; grid kinds (interval, rectangle,
//! periodic circle) keep enough structure to interpolate heights linearly and
//! to form gradients in flat fiber coordinates. A ceiling assigns each floor
//! point a nonnegative height, either one value per cell (step) or one value
//! per grid vertex with piecewise-linear interpolation.
//!
//! Cell weights already include the factor `f(base)^k`, so for the usual
//! normalization `f(0) = 1` they coincide with the flat cell measure.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::quad::MuIntegral;
use crate::warpfn::WarpingFunction;

/// 4-point Gauss–Legendre rule on [0, 1]: nodes and averaging weights
/// (weights sum to 1). Used as the fixed-order product rule on cells.
#[allow(clippy::excessive_precision)]
const GL4_NODES: [f64; 4] = [
    0.069431844202973712388026755553595,
    0.330009478207571867598667120448378,
    0.669990521792428132401332879551622,
    0.930568155797026287611973244446405,
];
#[allow(clippy::excessive_precision)]
const GL4_WEIGHTS: [f64; 4] = [
    0.173927422568726928686531974610999,
    0.326072577431273071313468025389001,
    0.326072577431273071313468025389001,
    0.173927422568726928686531974610999,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FloorKind {
    Interval,
    Rectangle,
    Circle,
    WeightedCells,
}

impl FloorKind {
    pub fn name(self) -> &'static str {
        match self {
            FloorKind::Interval => "interval",
            FloorKind::Rectangle => "rectangle",
            FloorKind::Circle => "circle",
            FloorKind::WeightedCells => "weighted_cells",
        }
    }
}

#[derive(Debug, Clone)]
enum Grid {
    /// `n` cells of width `dx`; `n + 1` vertices.
    Interval { n: usize, dx: f64 },
    /// `n × n` cells of size `dx × dy`, row-major; `(n+1)²` vertices.
    Rect { n: usize, dx: f64, dy: f64 },
    /// `n` cells of width `dx` with periodic wrap; `n` vertices.
    Circle { n: usize, dx: f64 },
}

/// A `k`-dimensional fiber region of finite volume, partitioned into cells
/// with strictly positive weights.
#[derive(Debug, Clone)]
pub struct Floor {
    kind: FloorKind,
    k: u32,
    base: f64,
    weights: Vec<f64>,
    grid: Option<Grid>,
}

impl Floor {
    /// Flat interval of the given length at height `base`, split into
    /// `cells` equal cells; `k = 1`.
    pub fn interval(length: f64, cells: usize, base: f64, wf: &WarpingFunction) -> Result<Self> {
        check_extent("interval length", length)?;
        check_cells(cells)?;
        let scale = base_scale(wf, base, 1)?;
        let w = length / cells as f64 * scale;
        Ok(Floor {
            kind: FloorKind::Interval,
            k: 1,
            base,
            weights: vec![w; cells],
            grid: Some(Grid::Interval { n: cells, dx: length / cells as f64 }),
        })
    }

    /// Flat rectangle `len1 × len2` at height `base`, split into
    /// `cells_per_axis²` cells (row-major); `k = 2`.
    pub fn rectangle(
        len1: f64,
        len2: f64,
        cells_per_axis: usize,
        base: f64,
        wf: &WarpingFunction,
    ) -> Result<Self> {
        check_extent("rectangle side", len1)?;
        check_extent("rectangle side", len2)?;
        check_cells(cells_per_axis)?;
        let scale = base_scale(wf, base, 2)?;
        let n = cells_per_axis;
        let dx = len1 / n as f64;
        let dy = len2 / n as f64;
        Ok(Floor {
            kind: FloorKind::Rectangle,
            k: 2,
            base,
            weights: vec![dx * dy * scale; n * n],
            grid: Some(Grid::Rect { n, dx, dy }),
        })
    }

    /// Flat circle of the given circumference at height `base` (periodic
    /// interval), split into `cells` equal cells; `k = 1`.
    pub fn circle(circumference: f64, cells: usize, base: f64, wf: &WarpingFunction) -> Result<Self> {
        check_extent("circumference", circumference)?;
        check_cells(cells)?;
        let scale = base_scale(wf, base, 1)?;
        let w = circumference / cells as f64 * scale;
        Ok(Floor {
            kind: FloorKind::Circle,
            k: 1,
            base,
            weights: vec![w; cells],
            grid: Some(Grid::Circle { n: cells, dx: circumference / cells as f64 }),
        })
    }

    /// Abstract weighted cells: the weights are taken verbatim as cell
    /// `k`-volumes (curved fibers enter through here).
    pub fn weighted_cells(weights: Vec<f64>, k: u32, base: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidFloor("no cells".into()));
        }
        if k == 0 {
            return Err(Error::InvalidFloor("dimension k must be at least 1".into()));
        }
        for (i, w) in weights.iter().enumerate() {
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::InvalidFloor(format!(
                    "cell {i} has weight {w}; weights must be strictly positive and finite"
                )));
            }
        }
        Ok(Floor { kind: FloorKind::WeightedCells, k, base, weights, grid: None })
    }

    pub fn kind(&self) -> FloorKind {
        self.kind
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn cell_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_grid(&self) -> bool {
        self.grid.is_some()
    }

    /// Number of independent vertices for linear ceilings.
    pub fn vertex_count(&self) -> Option<usize> {
        match &self.grid {
            Some(Grid::Interval { n, .. }) => Some(n + 1),
            Some(Grid::Rect { n, .. }) => Some((n + 1) * (n + 1)),
            Some(Grid::Circle { n, .. }) => Some(*n),
            None => None,
        }
    }

    /// Total `k`-volume: the pairwise sum of cell weights.
    pub fn volume(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// Uniformly rescale all cell weights (scale equivariance hooks).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidFloor(format!("scale factor must be positive, got {factor}")));
        }
        let mut scaled = self.clone();
        for w in &mut scaled.weights {
            *w *= factor;
        }
        Ok(scaled)
    }
}

fn check_extent(what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidFloor(format!("{what} must be positive and finite, got {v}")))
    }
}

fn check_cells(cells: usize) -> Result<()> {
    if cells == 0 {
        Err(Error::InvalidFloor("resolution must be at least 1 cell".into()))
    } else {
        Ok(())
    }
}

fn base_scale(wf: &WarpingFunction, base: f64, k: u32) -> Result<f64> {
    let (f, _, _) = wf.eval2(base)?;
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::InvalidFloor(format!(
            "warping function is not positive at the base height: f({base}) = {f}"
        )));
    }
    Ok(f.powi(k as i32))
}

/// Height field over a floor.
///
/// `Step` holds one height per cell; the graph of a step map is just the
/// union of the horizontal cell plateaus, with no wall area. `Linear` holds
/// one height per grid vertex, interpolated linearly (bilinearly on
/// rectangles), and is only meaningful over grid floors.
#[derive(Debug, Clone)]
pub enum Ceiling {
    Step(Vec<f64>),
    Linear(Vec<f64>),
}

impl Ceiling {
    pub fn step(heights: Vec<f64>) -> Result<Self> {
        check_heights(&heights)?;
        Ok(Ceiling::Step(heights))
    }

    pub fn constant(height: f64, cells: usize) -> Result<Self> {
        Ceiling::step(vec![height; cells])
    }

    pub fn linear(vertex_heights: Vec<f64>) -> Result<Self> {
        check_heights(&vertex_heights)?;
        Ok(Ceiling::Linear(vertex_heights))
    }

    pub fn heights(&self) -> &[f64] {
        match self {
            Ceiling::Step(h) | Ceiling::Linear(h) => h,
        }
    }

    pub fn is_step(&self) -> bool {
        matches!(self, Ceiling::Step(_))
    }

    pub fn max_height(&self) -> f64 {
        self.heights().iter().copied().fold(0.0, f64::max)
    }

    fn check_against(&self, floor: &Floor) -> Result<()> {
        match self {
            Ceiling::Step(h) => {
                if h.len() != floor.cell_count() {
                    return Err(Error::InvalidCeiling(format!(
                        "step ceiling has {} heights for {} cells",
                        h.len(),
                        floor.cell_count()
                    )));
                }
            }
            Ceiling::Linear(h) => {
                let Some(vertices) = floor.vertex_count() else {
                    return Err(Error::InvalidCeiling(
                        "linear ceilings need a grid floor".into(),
                    ));
                };
                if h.len() != vertices {
                    return Err(Error::InvalidCeiling(format!(
                        "linear ceiling has {} heights for {} vertices",
                        h.len(),
                        vertices
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_heights(heights: &[f64]) -> Result<()> {
    if heights.is_empty() {
        return Err(Error::InvalidCeiling("no heights".into()));
    }
    for (i, h) in heights.iter().enumerate() {
        if !(h.is_finite() && *h >= 0.0) {
            return Err(Error::InvalidCeiling(format!(
                "height {i} is {h}; heights must be nonnegative and finite"
            )));
        }
    }
    Ok(())
}

/// The region swept between a floor and its ceiling along the vertical
/// direction. Purely a view; all storage lives in the floor and ceiling.
#[derive(Debug, Clone, Copy)]
pub struct Room<'a> {
    pub floor: &'a Floor,
    pub ceiling: &'a Ceiling,
}

impl Room<'_> {
    pub fn volume(&self, m: &MuIntegral) -> Result<f64> {
        room_volume(self.floor, self.ceiling, m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AreaMode {
    /// Gradient-free lower bound `Σ w·μ(ℓ)`; exact for step ceilings.
    Vertical,
    /// Induced-metric area `Σ w·μ(ℓ)·√(1 + |∇ℓ|²/f(ℓ)²)` for linear ceilings
    /// over grid floors.
    Full,
}

/// Memoizing wrapper so that repeated heights (constant and step ceilings)
/// hit the quadrature only once per distinct value.
struct HeightFn<F: Fn(f64) -> Result<f64>> {
    f: F,
    memo: HashMap<u64, f64>,
}

impl<F: Fn(f64) -> Result<f64>> HeightFn<F> {
    fn new(f: F) -> Self {
        HeightFn { f, memo: HashMap::new() }
    }

    fn get(&mut self, h: f64) -> Result<f64> {
        if let Some(v) = self.memo.get(&h.to_bits()) {
            return Ok(*v);
        }
        let v = (self.f)(h)?;
        self.memo.insert(h.to_bits(), v);
        Ok(v)
    }
}

fn check_room_heights(ceiling: &Ceiling, m: &MuIntegral) -> Result<()> {
    let dm = m.domain_max();
    let max = ceiling.max_height();
    if max > dm + 1e-12 * dm.max(1.0) {
        return Err(Error::Range { quantity: "height", value: max, max: dm });
    }
    Ok(())
}

/// `(1+k)`-volume of the room: `Σᵢ wᵢ · I(ℓᵢ)` for step ceilings, per-cell
/// Gauss–Legendre averaging of `I(ℓ(q))` for linear ones.
pub fn room_volume(floor: &Floor, ceiling: &Ceiling, m: &MuIntegral) -> Result<f64> {
    ceiling.check_against(floor)?;
    check_room_heights(ceiling, m)?;
    let means = cell_means(floor, ceiling, |h| m.integral(h))?;
    Ok(weighted_total(floor, &means))
}

/// `k`-volume of the ceiling graph in the chosen mode.
pub fn ceiling_area(floor: &Floor, ceiling: &Ceiling, m: &MuIntegral, mode: AreaMode) -> Result<f64> {
    ceiling.check_against(floor)?;
    check_room_heights(ceiling, m)?;
    match mode {
        AreaMode::Vertical => {
            let means = cell_means(floor, ceiling, |h| m.mu(h))?;
            Ok(weighted_total(floor, &means))
        }
        AreaMode::Full => full_area(floor, ceiling, m),
    }
}

fn weighted_total(floor: &Floor, means: &[f64]) -> f64 {
    let terms: Vec<f64> = floor.weights().iter().zip(means).map(|(w, v)| w * v).collect();
    pairwise_sum(&terms)
}

/// Per-cell mean of `value(ℓ(q))` over the cell: the height itself for step
/// ceilings, the fixed product rule applied to the interpolant for linear
/// ones. Shared by volumes, areas, and the calibration integrals.
pub fn cell_means<F: Fn(f64) -> Result<f64>>(
    floor: &Floor,
    ceiling: &Ceiling,
    value: F,
) -> Result<Vec<f64>> {
    ceiling.check_against(floor)?;
    let mut value = HeightFn::new(value);
    let mut means = Vec::with_capacity(floor.cell_count());
    match ceiling {
        Ceiling::Step(heights) => {
            for h in heights {
                means.push(value.get(*h)?);
            }
        }
        Ceiling::Linear(v) => {
            let grid = floor.grid.as_ref().expect("checked: linear needs grid");
            for cell in 0..floor.cell_count() {
                let mut mean = 0.0;
                for_cell_nodes(grid, v, cell, |height, node_weight| {
                    mean += node_weight * value.get(height)?;
                    Ok(())
                })?;
                means.push(mean);
            }
        }
    }
    Ok(means)
}

/// Visit the Gauss–Legendre nodes of one cell of the linear interpolant.
fn for_cell_nodes(
    grid: &Grid,
    vertex_heights: &[f64],
    cell: usize,
    mut visit: impl FnMut(f64, f64) -> Result<()>,
) -> Result<()> {
    match grid {
        Grid::Interval { .. } => {
            let (lo, hi) = (vertex_heights[cell], vertex_heights[cell + 1]);
            for (x, w) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
                visit(lo + (hi - lo) * x, w)?;
            }
        }
        Grid::Circle { n, .. } => {
            let (lo, hi) = (vertex_heights[cell], vertex_heights[(cell + 1) % n]);
            for (x, w) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
                visit(lo + (hi - lo) * x, w)?;
            }
        }
        Grid::Rect { n, .. } => {
            let (ix, iy) = (cell % n, cell / n);
            let stride = n + 1;
            let c00 = vertex_heights[iy * stride + ix];
            let c10 = vertex_heights[iy * stride + ix + 1];
            let c01 = vertex_heights[(iy + 1) * stride + ix];
            let c11 = vertex_heights[(iy + 1) * stride + ix + 1];
            for (x, wx) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
                for (y, wy) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
                    let h = c00 * (1.0 - x) * (1.0 - y)
                        + c10 * x * (1.0 - y)
                        + c01 * (1.0 - x) * y
                        + c11 * x * y;
                    visit(h, wx * wy)?;
                }
            }
        }
    }
    Ok(())
}

/// Per-cell gradient of the linear interpolant in flat fiber coordinates:
/// these are the central differences of the vertex values at the cell
/// center (periodic wrap on circles).
fn cell_gradient_sq(grid: &Grid, vertex_heights: &[f64], cell: usize) -> f64 {
    match grid {
        Grid::Interval { dx, .. } => {
            let g = (vertex_heights[cell + 1] - vertex_heights[cell]) / dx;
            g * g
        }
        Grid::Circle { n, dx } => {
            let g = (vertex_heights[(cell + 1) % n] - vertex_heights[cell]) / dx;
            g * g
        }
        Grid::Rect { n, dx, dy } => {
            let (ix, iy) = (cell % n, cell / n);
            let stride = n + 1;
            let c00 = vertex_heights[iy * stride + ix];
            let c10 = vertex_heights[iy * stride + ix + 1];
            let c01 = vertex_heights[(iy + 1) * stride + ix];
            let c11 = vertex_heights[(iy + 1) * stride + ix + 1];
            let gx = ((c10 + c11) - (c00 + c01)) / (2.0 * dx);
            let gy = ((c01 + c11) - (c00 + c10)) / (2.0 * dy);
            gx * gx + gy * gy
        }
    }
}

fn full_area(floor: &Floor, ceiling: &Ceiling, m: &MuIntegral) -> Result<f64> {
    let Some(grid) = floor.grid.as_ref() else {
        return Err(Error::UnsupportedMode);
    };
    match ceiling {
        // A step graph has no wall area: full coincides with vertical.
        Ceiling::Step(_) => {
            let means = cell_means(floor, ceiling, |h| m.mu(h))?;
            Ok(weighted_total(floor, &means))
        }
        Ceiling::Linear(v) => {
            let weights = floor.weights();
            let mut terms = Vec::with_capacity(weights.len());
            for (cell, w) in weights.iter().enumerate() {
                let grad_sq = cell_gradient_sq(grid, v, cell);
                let mut mean = 0.0;
                for_cell_nodes(grid, v, cell, |height, node_weight| {
                    let mu = m.mu(height)?;
                    let (f, _, _) = m.wf().eval2(height)?;
                    mean += node_weight * mu * (1.0 + grad_sq / (f * f)).sqrt();
                    Ok(())
                })?;
                terms.push(w * mean);
            }
            Ok(pairwise_sum(&terms))
        }
    }
}
