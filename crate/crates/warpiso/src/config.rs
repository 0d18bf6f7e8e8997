//! Run configuration: plain-text `[section]` / `key = value` files with
//! command-line overrides.
//!
//! Sections: `[warping]` (expression, fiber dimension, working interval),
//! `[floor]`, `[ceiling]`, and `[run]` (seed, tolerances, window and output
//! parameters). `#` starts a comment. Any key may be overridden on the
//! command line with `--set section.key=value`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geom::{Ceiling, Floor};
use crate::quad::{MuIntegral, DEFAULT_TOL_QUAD};
use crate::warpfn::{WarpingFunction, DEFAULT_CERT_GRID};

#[derive(Debug, Clone)]
pub struct WarpingConfig {
    pub expression: String,
    pub k: u32,
    pub domain_max: f64,
    pub declared_limit: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum FloorConfig {
    Interval { length: f64, resolution: usize },
    Rectangle { len1: f64, len2: f64, resolution: usize },
    Circle { circumference: f64, resolution: usize },
    WeightedCells { weights: Vec<f64>, dimension: Option<u32> },
}

#[derive(Debug, Clone)]
pub enum CeilingConfig {
    Constant(f64),
    Step(Vec<f64>),
    Linear(Vec<f64>),
    Csv(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunSection {
    pub seed: u64,
    pub tol_quad: f64,
    pub tol_verify: f64,
    pub cert_grid: usize,
    pub h_min: Option<f64>,
    pub h_max: Option<f64>,
    pub samples: usize,
    /// Target ceiling area for the fixed-area solver.
    pub area: Option<f64>,
    pub output: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 0,
            tol_quad: DEFAULT_TOL_QUAD,
            tol_verify: crate::isoperimetric::DEFAULT_TOL_VERIFY,
            cert_grid: DEFAULT_CERT_GRID,
            h_min: None,
            h_max: None,
            samples: 512,
            area: None,
            output: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub warping: WarpingConfig,
    pub floor: Option<FloorConfig>,
    pub floor_base: f64,
    pub ceiling: Option<CeilingConfig>,
    pub run: RunSection,
}

impl RunConfig {
    /// Read a config file and apply `--set section.key=value` overrides.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.to_owned(), source })?;
        let mut sections = parse_sections(&text)?;
        apply_overrides(&mut sections, overrides)?;
        RunConfig::from_sections(sections)
    }

    pub fn from_text(text: &str, overrides: &[String]) -> Result<Self> {
        let mut sections = parse_sections(text)?;
        apply_overrides(&mut sections, overrides)?;
        RunConfig::from_sections(sections)
    }

    fn from_sections(mut sections: Sections) -> Result<Self> {
        let warping = {
            let mut s = sections.remove("warping").ok_or_else(|| {
                Error::Config("missing [warping] section".into())
            })?;
            let expression = s.take_required("warping", "expression")?;
            let k = s.take_parse::<u32>("warping", "k")?.or(s.take_parse::<u32>("warping", "n")?);
            let k = k.ok_or_else(|| Error::Config("missing warping.k (fiber dimension)".into()))?;
            let domain_max = s
                .take_parse::<f64>("warping", "domain_max")?
                .ok_or_else(|| Error::Config("missing warping.domain_max".into()))?;
            let declared_limit = s.take_parse::<f64>("warping", "declared_limit")?;
            s.finish("warping")?;
            WarpingConfig { expression, k, domain_max, declared_limit }
        };

        let mut floor_base = 0.0;
        let floor = match sections.remove("floor") {
            None => None,
            Some(mut s) => {
                let kind = s.take_required("floor", "kind")?;
                floor_base = s.take_parse::<f64>("floor", "base")?.unwrap_or(0.0);
                let resolution = s.take_parse::<usize>("floor", "resolution")?.unwrap_or(16);
                let cfg = match kind.as_str() {
                    "interval" => FloorConfig::Interval {
                        length: s
                            .take_parse::<f64>("floor", "length")?
                            .ok_or_else(|| Error::Config("interval floor needs floor.length".into()))?,
                        resolution,
                    },
                    "rectangle" => FloorConfig::Rectangle {
                        len1: s
                            .take_parse::<f64>("floor", "len1")?
                            .ok_or_else(|| Error::Config("rectangle floor needs floor.len1".into()))?,
                        len2: s
                            .take_parse::<f64>("floor", "len2")?
                            .ok_or_else(|| Error::Config("rectangle floor needs floor.len2".into()))?,
                        resolution,
                    },
                    "circle" => FloorConfig::Circle {
                        circumference: s.take_parse::<f64>("floor", "circumference")?.ok_or_else(
                            || Error::Config("circle floor needs floor.circumference".into()),
                        )?,
                        resolution,
                    },
                    "weighted_cells" => FloorConfig::WeightedCells {
                        weights: s
                            .take_list("floor", "weights")?
                            .ok_or_else(|| Error::Config("weighted_cells floor needs floor.weights".into()))?,
                        dimension: s.take_parse::<u32>("floor", "dimension")?,
                    },
                    other => {
                        return Err(Error::Config(format!("unknown floor kind `{other}`")));
                    }
                };
                s.finish("floor")?;
                Some(cfg)
            }
        };

        let ceiling = match sections.remove("ceiling") {
            None => None,
            Some(mut s) => {
                let mode = s.take_required("ceiling", "mode")?;
                let cfg = match mode.as_str() {
                    "constant" => CeilingConfig::Constant(
                        s.take_parse::<f64>("ceiling", "constant")?
                            .ok_or_else(|| Error::Config("constant ceiling needs ceiling.constant".into()))?,
                    ),
                    "step" => {
                        if let Some(path) = s.take("csv") {
                            CeilingConfig::Csv(PathBuf::from(path))
                        } else {
                            CeilingConfig::Step(s.take_list("ceiling", "heights")?.ok_or_else(
                                || Error::Config("step ceiling needs ceiling.heights or ceiling.csv".into()),
                            )?)
                        }
                    }
                    "linear" => CeilingConfig::Linear(s.take_list("ceiling", "heights")?.ok_or_else(
                        || Error::Config("linear ceiling needs ceiling.heights (vertex values)".into()),
                    )?),
                    other => {
                        return Err(Error::Config(format!("unknown ceiling mode `{other}`")));
                    }
                };
                s.finish("ceiling")?;
                Some(cfg)
            }
        };

        let run = match sections.remove("run") {
            None => RunSection::default(),
            Some(mut s) => {
                let mut run = RunSection::default();
                if let Some(v) = s.take_parse::<u64>("run", "seed")? {
                    run.seed = v;
                }
                if let Some(v) = s.take_parse::<f64>("run", "tol_quad")? {
                    run.tol_quad = v;
                }
                if let Some(v) = s.take_parse::<f64>("run", "tol_verify")? {
                    run.tol_verify = v;
                }
                if let Some(v) = s.take_parse::<usize>("run", "cert_grid")? {
                    run.cert_grid = v;
                }
                run.h_min = s.take_parse::<f64>("run", "h_min")?;
                run.h_max = s.take_parse::<f64>("run", "h_max")?;
                if let Some(v) = s.take_parse::<usize>("run", "samples")? {
                    run.samples = v;
                }
                run.area = s.take_parse::<f64>("run", "area")?;
                run.output = s.take("output").map(PathBuf::from);
                s.finish("run")?;
                run
            }
        };

        if let Some(name) = sections.keys().next() {
            return Err(Error::Config(format!("unknown section [{name}]")));
        }

        Ok(RunConfig { warping, floor, floor_base, ceiling, run })
    }

    pub fn build_warping(&self) -> Result<WarpingFunction> {
        Ok(WarpingFunction::parse(&self.warping.expression, self.warping.domain_max)?
            .with_declared_limit(self.warping.declared_limit))
    }

    pub fn build_mu(&self) -> Result<MuIntegral> {
        MuIntegral::new(self.build_warping()?, self.warping.k)?.with_tol_quad(self.run.tol_quad)
    }

    pub fn build_floor(&self, wf: &WarpingFunction) -> Result<Floor> {
        let cfg = self
            .floor
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs a [floor] section".into()))?;
        let floor = match cfg {
            FloorConfig::Interval { length, resolution } => {
                Floor::interval(*length, *resolution, self.floor_base, wf)?
            }
            FloorConfig::Rectangle { len1, len2, resolution } => {
                Floor::rectangle(*len1, *len2, *resolution, self.floor_base, wf)?
            }
            FloorConfig::Circle { circumference, resolution } => {
                Floor::circle(*circumference, *resolution, self.floor_base, wf)?
            }
            FloorConfig::WeightedCells { weights, dimension } => Floor::weighted_cells(
                weights.clone(),
                dimension.unwrap_or(self.warping.k),
                self.floor_base,
            )?,
        };
        if floor.k() != self.warping.k {
            return Err(Error::Config(format!(
                "floor dimension {} does not match warping.k = {}",
                floor.k(),
                self.warping.k
            )));
        }
        Ok(floor)
    }

    pub fn build_ceiling(&self, floor: &Floor) -> Result<Ceiling> {
        let cfg = self
            .ceiling
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs a [ceiling] section".into()))?;
        match cfg {
            CeilingConfig::Constant(h) => Ceiling::constant(*h, floor.cell_count()),
            CeilingConfig::Step(heights) => Ceiling::step(heights.clone()),
            CeilingConfig::Linear(heights) => Ceiling::linear(heights.clone()),
            CeilingConfig::Csv(path) => {
                Ceiling::step(read_heights_csv(path, floor.cell_count())?)
            }
        }
    }
}

/// Ceiling CSV schema: header `cell_index,height`, one row per cell, every
/// cell covered exactly once.
pub fn read_heights_csv(path: &Path, cells: usize) -> Result<Vec<f64>> {
    let text =
        fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
    let mut lines = text.lines();
    match lines.next().map(str::trim) {
        Some("cell_index,height") => {}
        other => {
            return Err(Error::Config(format!(
                "{}: expected header `cell_index,height`, got {other:?}",
                path.display()
            )));
        }
    }
    let mut heights = vec![None; cells];
    for (lineno, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (idx, height) = line.split_once(',').ok_or_else(|| {
            Error::Config(format!("{}: line {}: expected `index,height`", path.display(), lineno + 2))
        })?;
        let idx: usize = idx.trim().parse().map_err(|_| {
            Error::Config(format!("{}: line {}: bad cell index `{idx}`", path.display(), lineno + 2))
        })?;
        let height: f64 = height.trim().parse().map_err(|_| {
            Error::Config(format!("{}: line {}: bad height `{height}`", path.display(), lineno + 2))
        })?;
        if idx >= cells {
            return Err(Error::Config(format!(
                "{}: cell index {idx} out of range for {cells} cells",
                path.display()
            )));
        }
        if heights[idx].replace(height).is_some() {
            return Err(Error::Config(format!(
                "{}: duplicate entry for cell {idx}",
                path.display()
            )));
        }
    }
    heights
        .into_iter()
        .enumerate()
        .map(|(i, h)| h.ok_or_else(|| Error::Config(format!("{}: missing height for cell {i}", path.display()))))
        .collect()
}

type Sections = BTreeMap<String, Section>;

#[derive(Debug, Default)]
struct Section {
    values: BTreeMap<String, String>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    fn take_required(&mut self, section: &str, key: &str) -> Result<String> {
        self.take(key)
            .ok_or_else(|| Error::Config(format!("missing {section}.{key}")))
    }

    fn take_parse<T: std::str::FromStr>(&mut self, section: &str, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::Config(format!("{section}.{key}: cannot parse `{raw}`"))
            }),
        }
    }

    fn take_list(&mut self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|piece| {
                    piece.trim().parse::<f64>().map_err(|_| {
                        Error::Config(format!("{section}.{key}: cannot parse `{piece}`"))
                    })
                })
                .collect::<Result<Vec<f64>>>()
                .map(Some),
        }
    }

    fn finish(self, section: &str) -> Result<()> {
        if let Some(key) = self.values.keys().next() {
            return Err(Error::Config(format!("unknown key {section}.{key}")));
        }
        Ok(())
    }
}

fn parse_sections(text: &str) -> Result<Sections> {
    let mut sections = Sections::new();
    let mut current: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.split_once('#') {
            Some((before, _)) => before.trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|rest| rest.strip_suffix(']')) {
            let name = name.trim().to_owned();
            sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let section = current.as_ref().ok_or_else(|| {
            Error::Config(format!("line {}: key outside any [section]", lineno + 1))
        })?;
        sections
            .get_mut(section)
            .expect("section exists")
            .values
            .insert(key.trim().to_owned(), value.trim().to_owned());
    }
    Ok(sections)
}

fn apply_overrides(sections: &mut Sections, overrides: &[String]) -> Result<()> {
    for item in overrides {
        let (key_path, value) = item.split_once('=').ok_or_else(|| {
            Error::Config(format!("--set expects section.key=value, got `{item}`"))
        })?;
        let (section, key) = key_path.split_once('.').ok_or_else(|| {
            Error::Config(format!("--set expects section.key=value, got `{item}`"))
        })?;
        sections
            .entry(section.trim().to_owned())
            .or_default()
            .values
            .insert(key.trim().to_owned(), value.trim().to_owned());
    }
    Ok(())
}
