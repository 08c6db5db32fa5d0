//! Run configuration: a flat TOML document layered over per-run defaults.
//!
//! ```toml
//! n = 48
//! p = "1/4"            # rational string, integer or decimal
//! r = 1
//! imax = 4
//! couplings = ["1", "-1/2", "1/4"]   # J_2, J_3, ...; or couplings_file / coupling_preset
//! n_grid = [200, 400, 600]
//! seed = 7
//! ```
//!
//! Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dashu_ratio::RBig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_couplings, CouplingSequence, ModelParams, DEFAULT_EPS};
use crate::numeric::{parse_rational, DEFAULT_PRECISION};
use crate::partition::DEFAULT_TERM_CAP;
use crate::dissection::DEFAULT_NODE_CAP;

/// A number given as an integer, a float, or a string such as `"1/20"`.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum NumberLike {
    Int(i64),
    Float(f64),
    Text(String),
}

impl NumberLike {
    pub fn to_rational(&self) -> Result<RBig> {
        match self {
            NumberLike::Int(v) => Ok(RBig::from(*v)),
            NumberLike::Float(v) => parse_rational(&v.to_string()),
            NumberLike::Text(s) => parse_rational(s),
        }
    }
}

/// The file format as written by users.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n: Option<u64>,
    pub p: Option<NumberLike>,
    pub r: Option<NumberLike>,
    pub imax: Option<u32>,
    pub eps: Option<f64>,
    pub couplings: Option<Vec<NumberLike>>,
    pub couplings_file: Option<PathBuf>,
    pub coupling_preset: Option<String>,
    pub n_grid: Option<Vec<u64>>,
    pub cutoff_imax: Option<u32>,
    pub seed: Option<u64>,
    pub precision: Option<usize>,
    pub term_cap: Option<u64>,
    pub node_cap: Option<usize>,
    pub draws: Option<usize>,
    pub tol_extrapolation: Option<f64>,
    pub tol_fit: Option<f64>,
    pub tol_t1: Option<f64>,
    pub tol_cutoff: Option<f64>,
    pub tol_contour: Option<f64>,
    pub tol_contour_floor: Option<f64>,
    pub tol_deformation: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Option<String>,
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut file = Self::from_toml(&text)?;
        if let (Some(rel), Some(dir)) = (&file.couplings_file, path.parent()) {
            if rel.is_relative() {
                file.couplings_file = Some(dir.join(rel));
            }
        }
        Ok(file)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    /// `|extrapolated − target|`.
    pub extrapolation: f64,
    /// RMS residual of the `c₀ + c₁/N` fit.
    pub fit: f64,
    /// `|ln T₁/N − target|` at the largest grid point.
    pub t1: f64,
    /// Change of the extrapolated value under the alternative cutoff.
    pub cutoff: f64,
    pub contour: f64,
    pub contour_floor: f64,
    pub deformation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            extrapolation: 1e-4,
            fit: 1e-6,
            t1: 1e-3,
            cutoff: 1e-6,
            contour: 1e-10,
            contour_floor: 1e-12,
            deformation: 1e-8,
        }
    }
}

/// Which run a set of defaults is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunKind {
    Partition,
    Limit,
    Contour,
    Bounds,
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub couplings: CouplingSequence,
    /// The named preset behind `couplings`, if any, so it can be regrown.
    pub preset: Option<String>,
    pub n_grid: Vec<u64>,
    pub cutoff_imax: Option<u32>,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub precision: usize,
    pub term_cap: u64,
    pub node_cap: usize,
    pub draws: usize,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

/// The instance used when nothing else is configured.
fn defaults(kind: RunKind) -> ConfigFile {
    let limit = kind == RunKind::Limit;
    ConfigFile {
        n: Some(if limit { 2000 } else { 48 }),
        p: Some(NumberLike::Text(if limit { "1/20" } else { "1/4" }.into())),
        r: Some(NumberLike::Int(1)),
        imax: Some(if limit { 8 } else { 4 }),
        eps: Some(DEFAULT_EPS),
        coupling_preset: Some("alternating".into()),
        n_grid: Some(if limit { (1..=10).map(|k| 200 * k).collect() } else { vec![48] }),
        cutoff_imax: if limit { Some(10) } else { None },
        seed: Some(20240601),
        draws: Some(if kind == RunKind::Partition { 100 } else { 1000 }),
        ..ConfigFile::default()
    }
}

fn couplings_from_file(path: &Path) -> Result<Vec<(u32, RBig)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let index: u32 = record
            .get(0)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Config(format!("bad index in {}", path.display())))?;
        let value = record
            .get(1)
            .ok_or_else(|| Error::Config(format!("missing value in {}", path.display())))?;
        out.push((index, parse_rational(value)?));
    }
    Ok(out)
}

/// `J₂, J₃, …` from whichever source the config names.
fn resolve_couplings(file: &ConfigFile, r: &RBig, imax: u32) -> Result<CouplingSequence> {
    let sources = [file.couplings.is_some(), file.couplings_file.is_some()];
    if sources.iter().filter(|&&s| s).count() > 1 {
        return Err(Error::Config("give either couplings or couplings_file, not both".into()));
    }
    let values: BTreeMap<u32, RBig> = if let Some(list) = &file.couplings {
        list.iter()
            .enumerate()
            .map(|(k, v)| Ok((k as u32 + 2, v.to_rational()?)))
            .collect::<Result<_>>()?
    } else if let Some(path) = &file.couplings_file {
        couplings_from_file(path)?.into_iter().collect()
    } else {
        let preset = file.coupling_preset.as_deref().unwrap_or("alternating");
        return match preset {
            "alternating" => Ok(CouplingSequence::alternating(r, imax)),
            "saturated" => Ok(CouplingSequence::saturated(r, imax)),
            "zero" => Ok(CouplingSequence::zero(r)),
            other => Err(Error::Config(format!("unknown coupling preset {other:?}"))),
        };
    };
    validate_couplings(values, r.clone())
}

impl RunConfig {
    /// Defaults for `kind` with every key set in `file` taking precedence.
    pub fn resolve(kind: RunKind, file: &ConfigFile) -> Result<Self> {
        let base = defaults(kind);
        let explicit_couplings = file.couplings.is_some() || file.couplings_file.is_some();
        let merged = ConfigFile {
            n: file.n.or(base.n),
            p: file.p.clone().or(base.p),
            r: file.r.clone().or(base.r),
            imax: file.imax.or(base.imax),
            eps: file.eps.or(base.eps),
            couplings: file.couplings.clone(),
            couplings_file: file.couplings_file.clone(),
            coupling_preset: if explicit_couplings {
                None
            } else {
                file.coupling_preset.clone().or(base.coupling_preset)
            },
            n_grid: file.n_grid.clone().or(base.n_grid),
            cutoff_imax: file.cutoff_imax.or(base.cutoff_imax),
            seed: file.seed.or(base.seed),
            precision: file.precision.or(base.precision),
            term_cap: file.term_cap.or(base.term_cap),
            node_cap: file.node_cap.or(base.node_cap),
            draws: file.draws.or(base.draws),
            output: file.output.clone(),
            format: file.format.clone(),
            ..file.clone()
        };
        let imax = merged.imax.unwrap_or(8);
        let r = merged.r.as_ref().map(NumberLike::to_rational).transpose()?.unwrap_or(RBig::ONE);
        let p = merged
            .p
            .as_ref()
            .ok_or_else(|| Error::Config("p is required".into()))?
            .to_rational()?;
        let n = merged.n.unwrap_or(48);
        let couplings = resolve_couplings(&merged, &r, imax)?;
        if let Some(&top) = couplings.values().keys().next_back() {
            if top > imax {
                return Err(Error::Config(format!("coupling J_{top} lies beyond imax = {imax}")));
            }
        }
        let params = ModelParams::new(n, p, r, imax, merged.eps.unwrap_or(DEFAULT_EPS))?;
        let n_grid = merged.n_grid.unwrap_or_else(|| vec![n]);
        if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_grid must be nonempty and strictly increasing".into()));
        }
        for &grid_n in &n_grid {
            params.with_n(grid_n)?;
        }
        let defaults = Tolerances::default();
        let tolerances = Tolerances {
            extrapolation: merged.tol_extrapolation.unwrap_or(defaults.extrapolation),
            fit: merged.tol_fit.unwrap_or(defaults.fit),
            t1: merged.tol_t1.unwrap_or(defaults.t1),
            cutoff: merged.tol_cutoff.unwrap_or(defaults.cutoff),
            contour: merged.tol_contour.unwrap_or(defaults.contour),
            contour_floor: merged.tol_contour_floor.unwrap_or(defaults.contour_floor),
            deformation: merged.tol_deformation.unwrap_or(defaults.deformation),
        };
        let format = merged.format.as_deref().map(str::parse).transpose()?.unwrap_or_default();
        Ok(Self {
            params,
            couplings,
            preset: merged.coupling_preset,
            n_grid,
            cutoff_imax: merged.cutoff_imax,
            tolerances,
            seed: merged.seed.unwrap_or(0),
            precision: merged.precision.unwrap_or(DEFAULT_PRECISION),
            term_cap: merged.term_cap.unwrap_or(DEFAULT_TERM_CAP),
            node_cap: merged.node_cap.unwrap_or(DEFAULT_NODE_CAP),
            draws: merged.draws.unwrap_or(100),
            output: merged.output,
            format,
        })
    }

    /// The couplings for a run truncated at `imax` instead. Presets are
    /// regenerated; explicit lists keep their values and drop indices above
    /// `imax`.
    pub fn couplings_for_imax(&self, imax: u32) -> Result<CouplingSequence> {
        let r = self.params.r();
        match self.preset.as_deref() {
            Some("alternating") => Ok(CouplingSequence::alternating(r, imax)),
            Some("saturated") => Ok(CouplingSequence::saturated(r, imax)),
            _ => validate_couplings(
                self.couplings.values().range(..=imax).map(|(&i, v)| (i, v.clone())).collect(),
                r.clone(),
            ),
        }
    }

    pub fn default_for(kind: RunKind) -> Self {
        Self::resolve(kind, &ConfigFile::default()).expect("built-in defaults are valid")
    }
}
