//! Parameter grids, parallel evaluation and grid serialization.
//!
//! Cells are independent tasks over an immutable parameter base. Results
//! are collected by cell index, so a grid is identical for any worker
//! count. Each cell holds either a finite value or a tagged sentinel
//! ([`CellStatus`]).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ep::pair_count_grid;
use crate::error::{Error, Result};
use crate::model::{Boundary, ChainParams};
use crate::spectral::{lambda_value, pt_threshold_first, ScanOptions};

/// Version tag written into JSON grids.
pub const SCHEMA_VERSION: u32 = 1;

/// Default points per continuous axis.
pub const DEFAULT_AXIS_POINTS: usize = 101;

/// Uniform axis `lo, …, hi` with `n` points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64, n: usize) -> Self {
        Self {
            name: name.into(),
            lo,
            hi,
            n,
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.n <= 1 {
            return self.lo;
        }
        if i + 1 == self.n {
            return self.hi;
        }
        self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i)).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || !self.lo.is_finite() || !self.hi.is_finite() || self.hi < self.lo {
            return Err(Error::param(format!(
                "axis {} must have n ≥ 1 and finite lo ≤ hi, got {}..{} with {} points",
                self.name, self.lo, self.hi, self.n
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Threshold,
    Lambda,
    PairCount,
}

impl GridKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GridKind::Threshold => "threshold",
            GridKind::Lambda => "lambda",
            GridKind::PairCount => "pair_count",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "threshold" => Some(GridKind::Threshold),
            "lambda" => Some(GridKind::Lambda),
            "pair_count" => Some(GridKind::PairCount),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    #[default]
    Ok,
    /// Threshold search reached `gamma_max`; the value is `gamma_max`.
    Capped,
    /// PT-symmetric point of a Λ map; the value is the floor.
    Floor,
    /// The cell's computation failed; the value is NaN.
    Failed,
}

impl CellStatus {
    fn as_str(&self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Capped => "capped",
            CellStatus::Floor => "floor",
            CellStatus::Failed => "failed",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "ok" => Some(CellStatus::Ok),
            "capped" => Some(CellStatus::Capped),
            "floor" => Some(CellStatus::Floor),
            "failed" => Some(CellStatus::Failed),
            _ => None,
        }
    }
}

/// Fixed parameters of a grid: the chain base point plus scan settings
/// (`gamma_max`, `tol`, `eps`, `floor`, ...).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub params: ChainParams,
    pub settings: BTreeMap<String, f64>,
}

/// 2D grid of one scalar per cell; rows follow `y`, columns follow `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid {
    pub kind: GridKind,
    pub x: Axis,
    pub y: Axis,
    /// Row-major, `y.n × x.n`.
    pub cells: Vec<f64>,
    pub status: Vec<CellStatus>,
    pub meta: GridMeta,
}

impl PhaseGrid {
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.cells[iy * self.x.n + ix]
    }

    pub fn status_at(&self, ix: usize, iy: usize) -> CellStatus {
        self.status[iy * self.x.n + ix]
    }

    pub fn row(&self, iy: usize) -> &[f64] {
        &self.cells[iy * self.x.n..(iy + 1) * self.x.n]
    }

    /// Checks the shape and the sentinel contract.
    pub fn validate(&self) -> Result<()> {
        let n = self.x.n * self.y.n;
        if self.cells.len() != n || self.status.len() != n {
            return Err(Error::Format {
                what: "grid",
                detail: format!(
                    "{} cells and {} statuses for a {}×{} grid",
                    self.cells.len(),
                    self.status.len(),
                    self.y.n,
                    self.x.n
                ),
            });
        }
        for (v, s) in self.cells.iter().zip(&self.status) {
            if v.is_finite() == (*s == CellStatus::Failed) {
                return Err(Error::Format {
                    what: "grid",
                    detail: format!("cell value {v} inconsistent with status {}", s.as_str()),
                });
            }
        }
        Ok(())
    }
}

/// Runs `f` on a dedicated pool of `workers` threads (at least one).
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::param(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Evaluates `cell(x, y)` on every grid point in parallel; failures become
/// [`CellStatus::Failed`] with a NaN value.
fn evaluate(
    x: &Axis,
    y: &Axis,
    workers: usize,
    cell: impl Fn(f64, f64) -> Result<(f64, CellStatus)> + Sync,
) -> Result<(Vec<f64>, Vec<CellStatus>)> {
    x.validate()?;
    y.validate()?;
    let nx = x.n;
    let results: Vec<(f64, CellStatus)> = with_workers(workers, || {
        (0..nx * y.n)
            .into_par_iter()
            .map(|idx| {
                let (xv, yv) = (x.value(idx % nx), y.value(idx / nx));
                cell(xv, yv).unwrap_or_else(|e| {
                    log::warn!("cell {}={xv}, {}={yv} failed: {e}", x.name, y.name);
                    (f64::NAN, CellStatus::Failed)
                })
            })
            .collect()
    })?;
    Ok(results.into_iter().unzip())
}

fn threshold_cell(p: &ChainParams, opts: &ScanOptions) -> Result<(f64, CellStatus)> {
    let r = pt_threshold_first(p, opts)?;
    let status = if r.capped {
        CellStatus::Capped
    } else {
        CellStatus::Ok
    };
    Ok((r.gamma_th, status))
}

fn scan_settings(opts: &ScanOptions) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("gamma_max".to_string(), opts.gamma_max),
        ("tol".to_string(), opts.tol),
        ("eps".to_string(), opts.eps),
        ("n_scan".to_string(), opts.n_scan as f64),
    ])
}

/// Threshold `γ_th(m0, δ)`: columns are the gain sites `1..=N/2`, rows `δ`.
pub fn threshold_map_m0_delta(
    base: &ChainParams,
    delta: &Axis,
    opts: &ScanOptions,
    workers: usize,
) -> Result<PhaseGrid> {
    base.validate()?;
    if base.n_sites < 2 {
        return Err(Error::param("threshold maps need at least two sites"));
    }
    let m_max = base.max_gain_site();
    let x = Axis::new("m0", 1.0, m_max as f64, m_max);
    let (cells, status) = evaluate(&x, delta, workers, |m0, d| {
        let p = base.with_gain_site(m0.round() as usize).with_sc_order(d);
        threshold_cell(&p, opts)
    })?;
    Ok(PhaseGrid {
        kind: GridKind::Threshold,
        x,
        y: delta.clone(),
        cells,
        status,
        meta: GridMeta {
            params: *base,
            settings: scan_settings(opts),
        },
    })
}

/// Threshold `γ_th(μ, δ)` at fixed `m0`: columns are `δ`, rows `μ`.
pub fn threshold_map_mu_delta(
    base: &ChainParams,
    mu: &Axis,
    delta: &Axis,
    opts: &ScanOptions,
    workers: usize,
) -> Result<PhaseGrid> {
    base.validate_gain_site()?;
    let (cells, status) = evaluate(delta, mu, workers, |d, m| {
        threshold_cell(&base.with_onsite(m).with_sc_order(d), opts)
    })?;
    Ok(PhaseGrid {
        kind: GridKind::Threshold,
        x: delta.clone(),
        y: mu.clone(),
        cells,
        status,
        meta: GridMeta {
            params: *base,
            settings: scan_settings(opts),
        },
    })
}

/// `Λ(δ, γ) = log10 max Im E`: columns are `δ`, rows `γ`.
pub fn lambda_map(
    base: &ChainParams,
    delta: &Axis,
    gamma: &Axis,
    floor: f64,
    eps: f64,
    workers: usize,
) -> Result<PhaseGrid> {
    base.validate_gain_site()?;
    let (cells, status) = evaluate(delta, gamma, workers, |d, g| {
        let v = lambda_value(&base.with_sc_order(d).with_gain_loss(g), floor, eps)?;
        let status = if v == floor {
            CellStatus::Floor
        } else {
            CellStatus::Ok
        };
        Ok((v, status))
    })?;
    Ok(PhaseGrid {
        kind: GridKind::Lambda,
        x: delta.clone(),
        y: gamma.clone(),
        cells,
        status,
        meta: GridMeta {
            params: *base,
            settings: BTreeMap::from([("floor".to_string(), floor), ("eps".to_string(), eps)]),
        },
    })
}

/// Number of complex-conjugate eigenvalue pairs on the (δ, γ) grid.
pub fn pair_count_map(
    base: &ChainParams,
    delta: &Axis,
    gamma: &Axis,
    eps: f64,
    workers: usize,
) -> Result<PhaseGrid> {
    delta.validate()?;
    gamma.validate()?;
    let counts = pair_count_grid(base, delta, gamma, eps, workers)?;
    Ok(PhaseGrid {
        kind: GridKind::PairCount,
        x: delta.clone(),
        y: gamma.clone(),
        cells: counts.iter().map(|&c| c as f64).collect(),
        status: vec![CellStatus::Ok; counts.len()],
        meta: GridMeta {
            params: *base,
            settings: BTreeMap::from([("eps".to_string(), eps)]),
        },
    })
}

/// Least-squares `α` of the zero-threshold boundary `δ² − J² = αμJ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaFit {
    pub alpha: f64,
    /// `(μ, δ_b)` boundary estimate per fitted row.
    pub points: Vec<(f64, f64)>,
}

/// Fits the upper zero-threshold boundary of a `μ`–`δ` threshold map.
///
/// For every row with `μ ≥ mu_min`, the last column whose threshold is at
/// least `level` marks the falling edge of the positive-threshold region;
/// the two cells ending there are extrapolated linearly to zero to give
/// `δ_b(μ)`. `α` is then the least-squares slope through the origin of
/// `δ_b² − J²` against `μJ`.
pub fn fit_zero_threshold_alpha(grid: &PhaseGrid, level: f64, mu_min: f64) -> Result<AlphaFit> {
    if grid.kind != GridKind::Threshold || grid.x.name != "delta" || grid.y.name != "mu" {
        return Err(Error::param("alpha fit needs a threshold grid with x = delta, y = mu"));
    }
    let j = grid.meta.params.hopping;
    let deltas = grid.x.values();
    let mut points = Vec::new();
    for iy in 0..grid.y.n {
        let mu = grid.y.value(iy);
        if mu < mu_min {
            continue;
        }
        let row = grid.row(iy);
        let Some(last) = (1..row.len()).rev().find(|&ix| row[ix] >= level) else {
            continue;
        };
        if last + 1 >= row.len() || last == 0 {
            continue;
        }
        let (x1, y1) = (deltas[last - 1], row[last - 1]);
        let (x2, y2) = (deltas[last], row[last]);
        let edge = if y1 > y2 {
            x2 + y2 * (x2 - x1) / (y1 - y2)
        } else {
            // flat top: fall back to the next column
            deltas[last + 1]
        };
        points.push((mu, edge));
    }
    if points.is_empty() {
        return Err(Error::Consistency("no zero-threshold boundary found in the grid".into()));
    }
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(mu, d) in &points {
        let x = mu * j;
        sxy += x * (d * d - j * j);
        sxx += x * x;
    }
    Ok(AlphaFit {
        alpha: sxy / sxx,
        points,
    })
}

fn boundary_str(b: Boundary) -> &'static str {
    match b {
        Boundary::Open => "open",
        Boundary::Periodic => "periodic",
    }
}

/// CSV text: a `# x=<name> y=<name> key=value ...` header, one
/// `# sentinel <ix> <iy> <status>` line per non-ok cell, then one row per
/// `y` value with the `x`-ordered cells.
pub fn to_csv_string(grid: &PhaseGrid) -> Result<String> {
    grid.validate()?;
    let p = &grid.meta.params;
    let mut out = String::new();
    write!(
        out,
        "# x={} y={} kind={} x_lo={} x_hi={} x_n={} y_lo={} y_hi={} y_n={} \
         n_sites={} hopping={} onsite={} sc_order={} gain_loss={} gain_site={} boundary={}",
        grid.x.name,
        grid.y.name,
        grid.kind.as_str(),
        grid.x.lo,
        grid.x.hi,
        grid.x.n,
        grid.y.lo,
        grid.y.hi,
        grid.y.n,
        p.n_sites,
        p.hopping,
        p.onsite,
        p.sc_order,
        p.gain_loss,
        p.gain_site,
        boundary_str(p.boundary),
    )
    .expect("write to string");
    for (k, v) in &grid.meta.settings {
        write!(out, " {k}={v}").expect("write to string");
    }
    out.push('\n');
    for (idx, s) in grid.status.iter().enumerate() {
        if *s != CellStatus::Ok {
            writeln!(out, "# sentinel {} {} {}", idx % grid.x.n, idx / grid.x.n, s.as_str())
                .expect("write to string");
        }
    }
    for iy in 0..grid.y.n {
        let row: Vec<String> = grid.row(iy).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn csv_err(detail: impl Into<String>) -> Error {
    Error::Format {
        what: "grid CSV",
        detail: detail.into(),
    }
}

/// Parses the output of [`to_csv_string`].
pub fn from_csv_str(text: &str) -> Result<PhaseGrid> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .and_then(|l| l.strip_prefix("# "))
        .ok_or_else(|| csv_err("missing header line"))?;
    let mut fields = BTreeMap::new();
    for tok in header.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| csv_err(format!("bad header token {tok}")))?;
        fields.insert(k.to_string(), v.to_string());
    }
    let mut take = |k: &str| fields.remove(k).ok_or_else(|| csv_err(format!("header lacks {k}")));
    let num = |s: String| s.parse::<f64>().map_err(|_| csv_err(format!("bad number {s}")));
    let int = |s: String| s.parse::<usize>().map_err(|_| csv_err(format!("bad integer {s}")));

    let x = Axis::new(take("x")?, num(take("x_lo")?)?, num(take("x_hi")?)?, int(take("x_n")?)?);
    let y = Axis::new(take("y")?, num(take("y_lo")?)?, num(take("y_hi")?)?, int(take("y_n")?)?);
    let kind_s = take("kind")?;
    let kind = GridKind::parse(&kind_s).ok_or_else(|| csv_err(format!("unknown kind {kind_s}")))?;
    let boundary = match take("boundary")?.as_str() {
        "open" => Boundary::Open,
        "periodic" => Boundary::Periodic,
        other => return Err(csv_err(format!("unknown boundary {other}"))),
    };
    let params = ChainParams {
        n_sites: int(take("n_sites")?)?,
        hopping: num(take("hopping")?)?,
        onsite: num(take("onsite")?)?,
        sc_order: num(take("sc_order")?)?,
        gain_loss: num(take("gain_loss")?)?,
        gain_site: int(take("gain_site")?)?,
        boundary,
    };
    let settings = fields
        .into_iter()
        .map(|(k, v)| num(v).map(|v| (k, v)))
        .collect::<Result<BTreeMap<_, _>>>()?;

    let mut status = vec![CellStatus::Ok; x.n * y.n];
    let mut cells = Vec::with_capacity(x.n * y.n);
    for line in lines {
        if let Some(rest) = line.strip_prefix("# sentinel ") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let [ix, iy, s] = parts[..] else {
                return Err(csv_err(format!("bad sentinel line {line}")));
            };
            let (ix, iy) = (int(ix.to_string())?, int(iy.to_string())?);
            let s = CellStatus::parse(s).ok_or_else(|| csv_err(format!("unknown status {s}")))?;
            if ix >= x.n || iy >= y.n {
                return Err(csv_err(format!("sentinel outside grid: {line}")));
            }
            status[iy * x.n + ix] = s;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| num(t.trim().to_string()))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != x.n {
            return Err(csv_err(format!("row has {} values, expected {}", row.len(), x.n)));
        }
        cells.extend(row);
    }
    let grid = PhaseGrid {
        kind,
        x,
        y,
        cells,
        status,
        meta: GridMeta { params, settings },
    };
    grid.validate().map_err(|e| csv_err(e.to_string()))?;
    Ok(grid)
}

#[derive(Serialize, Deserialize)]
struct GridFile {
    schema_version: u32,
    kind: GridKind,
    x_axis: Axis,
    y_axis: Axis,
    /// Row-major; `null` marks a failed cell.
    cells: Vec<Vec<Option<f64>>>,
    status: Vec<Vec<CellStatus>>,
    meta: GridMeta,
}

pub fn to_json_string(grid: &PhaseGrid) -> Result<String> {
    grid.validate()?;
    let nx = grid.x.n;
    let file = GridFile {
        schema_version: SCHEMA_VERSION,
        kind: grid.kind,
        x_axis: grid.x.clone(),
        y_axis: grid.y.clone(),
        cells: grid
            .cells
            .chunks(nx)
            .map(|r| r.iter().map(|v| v.is_finite().then_some(*v)).collect())
            .collect(),
        status: grid.status.chunks(nx).map(<[CellStatus]>::to_vec).collect(),
        meta: grid.meta.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).map_err(|e| Error::Format {
        what: "grid JSON",
        detail: e.to_string(),
    })?;
    s.push('\n');
    Ok(s)
}

pub fn from_json_str(text: &str) -> Result<PhaseGrid> {
    let err = |detail: String| Error::Format {
        what: "grid JSON",
        detail,
    };
    let file: GridFile = serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(err(format!("unsupported schema version {}", file.schema_version)));
    }
    let grid = PhaseGrid {
        kind: file.kind,
        x: file.x_axis,
        y: file.y_axis,
        cells: file.cells.into_iter().flatten().map(|v| v.unwrap_or(f64::NAN)).collect(),
        status: file.status.into_iter().flatten().collect(),
        meta: file.meta,
    };
    grid.validate().map_err(|e| err(e.to_string()))?;
    Ok(grid)
}

/// Binary P6 image, one pixel per cell, top row = largest `y`.
///
/// Ok cells map linearly from black (minimum) to white (maximum) over the
/// Ok values; floor cells are black; capped and failed cells are red.
pub fn to_ppm_bytes(grid: &PhaseGrid) -> Result<Vec<u8>> {
    grid.validate()?;
    let (nx, ny) = (grid.x.n, grid.y.n);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (v, s) in grid.cells.iter().zip(&grid.status) {
        if *s == CellStatus::Ok {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    let mut out = format!("P6\n{nx} {ny}\n255\n").into_bytes();
    out.reserve(3 * nx * ny);
    for iy in (0..ny).rev() {
        for ix in 0..nx {
            let v = grid.get(ix, iy);
            let px = match grid.status_at(ix, iy) {
                CellStatus::Ok => {
                    let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
                    let g = (255.0 * t).round().clamp(0.0, 255.0) as u8;
                    [g, g, g]
                }
                CellStatus::Floor => [0, 0, 0],
                CellStatus::Capped | CellStatus::Failed => [255, 0, 0],
            };
            out.extend_from_slice(&px);
        }
    }
    Ok(out)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_csv(grid: &PhaseGrid, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), to_csv_string(grid)?.as_bytes())
}

pub fn write_json(grid: &PhaseGrid, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), to_json_string(grid)?.as_bytes())
}

pub fn write_ppm(grid: &PhaseGrid, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &to_ppm_bytes(grid)?)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<PhaseGrid> {
    from_csv_str(&read_text(path.as_ref())?)
}

pub fn read_json(path: impl AsRef<Path>) -> Result<PhaseGrid> {
    from_json_str(&read_text(path.as_ref())?)
}
