//! The simulation pipeline: sample inputs, pass them through a transfer
//! function and the logistic link, draw binary outputs, bin, and decompose.

mod output;
mod svg;

use std::cmp::Ordering;
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::binning::{build_joint, edges_for, BinStrategy, DEFAULT_BINS};
use crate::dist::{InfoSummary, JointDist3};
use crate::error::{Error, Result};
use crate::models::{mixture_spec, sample_bgm, sample_sbg, scenario, Model, SampleBatch, DEFAULT_SIGMA, RNG_NAME};
use crate::pid::{complete_spectrum, pid_broja, pid_ccs, pid_imin, zero_spectrum, BrojaOptions, CcsVariant, Method, Spectrum};
use crate::transfer::{eval_transfer, fit_bias, output_prob, simulate_outputs, TransferKind, TransferTag, T_CLAMP};

pub use output::{emit_csv, emit_metadata, write_csv, CSV_HEADER};
pub use svg::{emit_svg, render_svg};

pub const DEFAULT_N: usize = 1_000_000;
pub const MIN_N: usize = 1_000;

/// How per-cell seeds are derived; recorded in the run metadata.
pub const SEED_POLICY: &str = "cell seed = first 8 bytes (little-endian) of SHA-256(master seed LE bytes || \
     \"model=..;transfer=..;scenario=..;d=<f64 bits hex>;sigma=<f64 bits hex>\"); \
     input and output streams use SHA-256(cell seed LE bytes || \"inputs\" | \"outputs\")";

/// One experiment cell. `seed` is the master seed; the cell's own streams
/// are derived from it and the cell coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    pub model: Model,
    pub transfer: TransferTag,
    pub scenario: u8,
    pub d: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    /// Defaults to normalized spectra for BGM and bits for SBG.
    #[serde(default)]
    pub normalize: Option<bool>,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}
fn default_n() -> usize {
    DEFAULT_N
}
fn default_methods() -> Vec<Method> {
    Method::IMPLEMENTED.to_vec()
}
fn default_bins() -> usize {
    DEFAULT_BINS
}

impl CellConfig {
    pub fn new(model: Model, transfer: TransferTag, scenario: u8, d: f64) -> Self {
        Self {
            model,
            transfer,
            scenario,
            d,
            sigma: DEFAULT_SIGMA,
            n: DEFAULT_N,
            seed: 0,
            methods: default_methods(),
            normalize: None,
            bins: DEFAULT_BINS,
        }
    }

    pub fn normalized(&self) -> bool {
        self.normalize.unwrap_or(self.model == Model::Bgm)
    }

    pub fn key(&self) -> CellKey {
        CellKey {
            model: self.model,
            transfer: self.transfer,
            scenario: self.scenario,
            d: self.d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        scenario(self.scenario)?;
        if self.n < MIN_N {
            return Err(Error::InvalidConfig(format!("n must be at least {MIN_N}, got {}", self.n)));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("method list is empty".into()));
        }
        if let Some(m) = self.methods.iter().find(|m| !Method::IMPLEMENTED.contains(m)) {
            return Err(Error::UnsupportedMethod(m.as_str()));
        }
        if !(self.d.abs() < 1.0) {
            return Err(Error::InvalidCorrelation(self.d));
        }
        Ok(())
    }

    /// Seed of this cell's random streams. Depends on the master seed and
    /// the cell coordinates only, so cells can be added to a grid without
    /// changing the others.
    pub fn cell_seed(&self) -> u64 {
        let coords = format!(
            "model={};transfer={};scenario={};d={:016x};sigma={:016x}",
            self.model,
            self.transfer,
            self.scenario,
            self.d.to_bits(),
            self.sigma.to_bits()
        );
        hash_seed(self.seed, coords.as_bytes())
    }
}

fn hash_seed(seed: u64, label: &[u8]) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label);
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("digest is 32 bytes"))
}

/// Coordinates identifying a cell within a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    pub model: Model,
    pub transfer: TransferTag,
    pub scenario: u8,
    pub d: f64,
}

impl CellKey {
    fn cmp_canonical(&self, other: &Self) -> Ordering {
        (self.model, self.transfer, self.scenario)
            .cmp(&(other.model, other.transfer, other.scenario))
            .then(self.d.total_cmp(&other.d))
    }
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/s{}/d={}", self.model, self.transfer, self.scenario, self.d)
    }
}

/// Solver diagnostics carried with a BROJA spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrojaStats {
    pub iterations: usize,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub config: CellConfig,
    pub cell_seed: u64,
    /// Bias subtracted from the transfer value (fitted median for SBG).
    pub bias: f64,
    /// Largest |T − b| before clamping.
    pub max_abs_t: f64,
    /// Samples whose transfer value hit the clamp.
    pub clamped: usize,
    pub strategy: BinStrategy,
    #[serde(skip)]
    pub dist: JointDist3,
    pub summary: InfoSummary,
    pub spectra: Vec<Spectrum>,
    pub broja: Option<BrojaStats>,
}

impl CellResult {
    pub fn spectrum(&self, method: Method) -> Option<&Spectrum> {
        self.spectra.iter().find(|s| s.method == method)
    }
}

/// Intermediate products of a cell, before decomposition.
pub struct CellData {
    pub batch: SampleBatch,
    pub bias: f64,
    pub max_abs_t: f64,
    pub clamped: usize,
}

/// Samples inputs and simulates outputs for one cell.
pub fn simulate_cell(config: &CellConfig) -> Result<CellData> {
    config.validate()?;
    let sc = scenario(config.scenario)?;
    let seed = config.cell_seed();
    let in_seed = hash_seed(seed, b"inputs");
    let out_seed = hash_seed(seed, b"outputs");
    let mut batch = match config.model {
        Model::Bgm => sample_bgm(&mixture_spec(config.d, config.sigma, sc.s1, sc.s2)?, config.n, in_seed),
        Model::Sbg => sample_sbg(sc.s1, sc.s2, config.d, config.sigma, config.n, in_seed)?,
    };
    let bias = match config.model {
        Model::Bgm => 0.0,
        Model::Sbg => fit_bias(config.transfer, &batch),
    };
    let kind = TransferKind::with_bias(config.transfer, bias);
    let (theta, peaks): (Vec<f64>, Vec<f64>) = batch
        .r
        .par_iter()
        .zip(&batch.c)
        .map(|(&r, &c)| {
            let raw = (config.transfer.raw(r, c) - bias).abs();
            (output_prob(eval_transfer(kind, r, c)), if raw.is_nan() { 0.0 } else { raw })
        })
        .unzip();
    let max_abs_t = peaks.iter().copied().fold(0.0, f64::max);
    let clamped = peaks.iter().filter(|&&t| t >= T_CLAMP).count();
    if clamped > 0 {
        // The logistic is already saturated long before the clamp.
        log::info!("{}: transfer clamp reached by {clamped} samples", config.key());
    }
    log::info!("{}: max |T| = {max_abs_t:.3}", config.key());
    batch.y = Some(simulate_outputs(&theta, out_seed));
    Ok(CellData {
        batch,
        bias,
        max_abs_t,
        clamped,
    })
}

/// Bins a simulated batch into the joint array for this cell's model.
pub fn bin_cell(config: &CellConfig, batch: &SampleBatch) -> Result<(BinStrategy, JointDist3)> {
    let strategy = BinStrategy::for_model(config.model);
    let r_edges = edges_for(strategy, &batch.r, config.bins)?;
    let c_edges = edges_for(strategy, &batch.c, config.bins)?;
    Ok((strategy, build_joint(batch, &r_edges, &c_edges)?))
}

/// Runs the full pipeline for one cell.
pub fn run_cell(config: &CellConfig) -> Result<CellResult> {
    run_cell_inner(config).map_err(|e| Error::Cell {
        cell: config.key().to_string(),
        source: Box::new(e),
    })
}

fn run_cell_inner(config: &CellConfig) -> Result<CellResult> {
    let data = simulate_cell(config)?;
    let (strategy, dist) = bin_cell(config, &data.batch)?;
    let (summary, spectra, broja) = decompose_all(&dist, &config.methods, config.normalized())?;
    Ok(CellResult {
        config: config.clone(),
        cell_seed: config.cell_seed(),
        bias: data.bias,
        max_abs_t: data.max_abs_t,
        clamped: data.clamped,
        strategy,
        dist,
        summary,
        spectra,
        broja,
    })
}

/// Spectra of `dist` for each method, in the given order.
pub fn decompose_all(
    dist: &JointDist3,
    methods: &[Method],
    normalize: bool,
) -> Result<(InfoSummary, Vec<Spectrum>, Option<BrojaStats>)> {
    let summary = dist.summary()?;
    let mut broja = None;
    let mut spectra = Vec::with_capacity(methods.len());
    for &m in methods {
        let comps = match m {
            Method::Imin => pid_imin(dist)?,
            Method::Broja => {
                let (c, sol) = pid_broja(dist, &BrojaOptions::default())?;
                broja = Some(BrojaStats {
                    iterations: sol.iterations,
                    gap: sol.gap,
                });
                c
            }
            Method::Ccs => pid_ccs(dist, CcsVariant::default())?,
            Method::Proj => return Err(Error::UnsupportedMethod("proj")),
            Method::Dep => return Err(Error::UnsupportedMethod("dep")),
        };
        let spec = match complete_spectrum(&comps, &summary, normalize) {
            Err(Error::ZeroEntropyOutput) => zero_spectrum(m, summary.hy),
            other => other?,
        };
        spectra.push(spec);
    }
    Ok((summary, spectra, broja))
}

/// A factor that may be given as one value or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Grid specification: the fields of [`CellConfig`], with the four factors
/// allowed to be lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub model: OneOrMany<Model>,
    pub transfer: OneOrMany<TransferTag>,
    pub scenario: OneOrMany<u8>,
    pub d: OneOrMany<f64>,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub normalize: Option<bool>,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

impl GridConfig {
    /// The standard BGM grid: all transfers and scenarios at d = 0.2, 0.8.
    pub fn bgm_default(methods: Vec<Method>, n: usize, seed: u64) -> Self {
        Self {
            model: OneOrMany::One(Model::Bgm),
            transfer: OneOrMany::Many(TransferTag::ALL.to_vec()),
            scenario: OneOrMany::Many(vec![1, 2, 3, 4]),
            d: OneOrMany::Many(vec![0.2, 0.8]),
            sigma: DEFAULT_SIGMA,
            n,
            seed,
            methods,
            normalize: None,
            bins: DEFAULT_BINS,
        }
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Cartesian product of the factors in canonical order.
    pub fn cells(&self) -> Result<Vec<CellConfig>> {
        let (models, transfers, scenarios, ds) =
            (self.model.to_vec(), self.transfer.to_vec(), self.scenario.to_vec(), self.d.to_vec());
        if models.is_empty() || transfers.is_empty() || scenarios.is_empty() || ds.is_empty() {
            return Err(Error::InvalidConfig("every factor needs at least one level".into()));
        }
        let mut cells = Vec::new();
        for &model in &models {
            for &transfer in &transfers {
                for &scenario in &scenarios {
                    for &d in &ds {
                        let cell = CellConfig {
                            model,
                            transfer,
                            scenario,
                            d,
                            sigma: self.sigma,
                            n: self.n,
                            seed: self.seed,
                            methods: self.methods.clone(),
                            normalize: self.normalize,
                            bins: self.bins,
                        };
                        cell.validate()?;
                        cells.push(cell);
                    }
                }
            }
        }
        cells.sort_by(|a, b| a.key().cmp_canonical(&b.key()));
        cells.dedup_by(|a, b| a.key().cmp_canonical(&b.key()) == Ordering::Equal);
        Ok(cells)
    }
}

/// One output row: a cell and one method's spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub key: CellKey,
    pub spectrum: Spectrum,
    pub seed: u64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellFailure {
    pub key: CellKey,
    pub error: String,
    pub nonconvergence: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridMetadata {
    pub version: &'static str,
    pub rng: &'static str,
    pub seed_policy: &'static str,
    pub master_seed: u64,
    pub elapsed_seconds: f64,
    pub cells: Vec<CellMetadata>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellMetadata {
    pub key: CellKey,
    pub cell_seed: u64,
    pub bias: f64,
    pub max_abs_t: f64,
    pub clamped: usize,
    pub strategy: BinStrategy,
    pub broja: Option<BrojaStats>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridResult {
    pub rows: Vec<GridRow>,
    pub failures: Vec<CellFailure>,
    pub metadata: GridMetadata,
    #[serde(skip)]
    pub cells: Vec<CellResult>,
}

impl GridResult {
    pub fn cell(&self, key: &CellKey) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.config.key().cmp_canonical(key) == Ordering::Equal)
    }

    pub fn row(&self, key: &CellKey, method: Method) -> Option<&GridRow> {
        self.rows
            .iter()
            .find(|r| r.spectrum.method == method && r.key.cmp_canonical(key) == Ordering::Equal)
    }
}

/// Runs every cell of the grid concurrently. A failing cell is recorded in
/// `failures` and does not stop the others.
pub fn run_grid(grid: &GridConfig) -> Result<GridResult> {
    let cells = grid.cells()?;
    let start = Instant::now();
    let outcomes: Vec<Result<CellResult>> = cells.par_iter().map(run_cell).collect();
    Ok(assemble(grid.seed, cells, outcomes, start.elapsed().as_secs_f64()))
}

/// Same as [`run_grid`] but one cell at a time.
pub fn run_grid_serial(grid: &GridConfig) -> Result<GridResult> {
    let cells = grid.cells()?;
    let start = Instant::now();
    let outcomes: Vec<Result<CellResult>> = cells.iter().map(run_cell).collect();
    Ok(assemble(grid.seed, cells, outcomes, start.elapsed().as_secs_f64()))
}

fn assemble(master_seed: u64, cells: Vec<CellConfig>, outcomes: Vec<Result<CellResult>>, elapsed: f64) -> GridResult {
    let mut done = Vec::new();
    let mut failures = Vec::new();
    for (cfg, out) in cells.iter().zip(outcomes) {
        match out {
            Ok(r) => done.push(r),
            Err(e) => failures.push(CellFailure {
                key: cfg.key(),
                nonconvergence: matches!(e.root(), Error::NonConvergence { .. }),
                error: e.to_string(),
            }),
        }
    }
    let mut rows: Vec<GridRow> = done
        .iter()
        .flat_map(|c| {
            c.spectra.iter().map(|s| GridRow {
                key: c.config.key(),
                spectrum: *s,
                seed: c.config.seed,
                n: c.config.n,
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        a.key
            .cmp_canonical(&b.key)
            .then(a.spectrum.method.cmp(&b.spectrum.method))
    });
    let metadata = GridMetadata {
        version: env!("CARGO_PKG_VERSION"),
        rng: RNG_NAME,
        seed_policy: SEED_POLICY,
        master_seed,
        elapsed_seconds: elapsed,
        cells: done
            .iter()
            .map(|c| CellMetadata {
                key: c.config.key(),
                cell_seed: c.cell_seed,
                bias: c.bias,
                max_abs_t: c.max_abs_t,
                clamped: c.clamped,
                strategy: c.strategy,
                broja: c.broja,
            })
            .collect(),
    };
    GridResult {
        rows,
        failures,
        metadata,
        cells: done,
    }
}

/// Quantities that can be compared between cells, all in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// I(Y;R) = UnqR + Shd.
    InfoR,
    /// I(Y;C) = UnqC + Shd.
    InfoC,
    /// I(Y;R,C).
    Transmitted,
    UnqR,
    UnqC,
    Shd,
    Syn,
    Hres,
}

impl Quantity {
    pub fn of(self, s: &Spectrum) -> f64 {
        let k = if s.normalized { s.hy } else { 1.0 };
        k * match self {
            Quantity::InfoR => s.unq_r + s.shd,
            Quantity::InfoC => s.unq_c + s.shd,
            Quantity::Transmitted => s.transmitted(),
            Quantity::UnqR => s.unq_r,
            Quantity::UnqC => s.unq_c,
            Quantity::Shd => s.shd,
            Quantity::Syn => s.syn,
            Quantity::Hres => s.hres,
        }
    }
}

/// `quantity(a) − quantity(b)` in bits for one method.
pub fn compare_cells(result: &GridResult, a: &CellKey, b: &CellKey, method: Method, quantity: Quantity) -> Result<f64> {
    let get = |k: &CellKey| {
        result
            .row(k, method)
            .map(|r| quantity.of(&r.spectrum))
            .ok_or_else(|| Error::MissingCell(format!("{k} ({method})")))
    };
    Ok(get(a)? - get(b)?)
}
