//! File formats: field snapshots, trajectory manifests and CSV tables.
//!
//! A snapshot is a 32-byte header followed by the cell values as
//! little-endian `f64`, row-major (first axis fastest). Header layout:
//! bytes 0..6 the magic `CHFLD1`, 6..8 zero, then `dim`, `n0` and `n1` as
//! little-endian `u64` (`n1 = 1` in 1D).
//!
//! A manifest is a TOML file listing, per written time node, the node index,
//! its time and one snapshot path per component, relative to the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use chfree_core::{
    AdjointTrajectory, ControlField, CostBreakdown, Field, FieldTriple, Grid, IterationRecord, StateTrajectory,
    StepDiagnostics, Trajectory,
};

use crate::error::IoError;

pub const SNAPSHOT_MAGIC: &[u8; 6] = b"CHFLD1";
pub const HEADER_LEN: usize = 32;

pub fn encode_snapshot(field: &Field) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * field.values().len());
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&(grid.dim() as u64).to_le_bytes());
    out.extend_from_slice(&(grid.n()[0] as u64).to_le_bytes());
    out.extend_from_slice(&(grid.n()[1] as u64).to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decodes a snapshot onto `grid`; the header must match its shape.
pub fn decode_snapshot(bytes: &[u8], grid: Grid) -> Result<Field, String> {
    if bytes.len() < HEADER_LEN || &bytes[..6] != SNAPSHOT_MAGIC {
        return Err("not a CHFLD1 snapshot".into());
    }
    let word = |i: usize| u64::from_le_bytes(bytes[8 + 8 * i..16 + 8 * i].try_into().unwrap()) as usize;
    let (dim, n0, n1) = (word(0), word(1), word(2));
    if dim != grid.dim() || [n0, n1] != grid.n() {
        return Err(format!(
            "snapshot shape dim={dim} n=[{n0}, {n1}] does not match the grid dim={} n={:?}",
            grid.dim(),
            grid.n()
        ));
    }
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * grid.cell_count() {
        return Err(format!("expected {} values, found {} bytes", grid.cell_count(), body.len()));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Field::from_values(grid, values).map_err(|e| e.to_string())
}

pub fn write_snapshot(path: &Path, field: &Field) -> Result<(), IoError> {
    fs::write(path, encode_snapshot(field)).map_err(|e| IoError::file(path, e))
}

pub fn read_snapshot(path: &Path, grid: Grid) -> Result<Field, IoError> {
    let bytes = fs::read(path).map_err(|e| IoError::file(path, e))?;
    decode_snapshot(&bytes, grid).map_err(|m| IoError::format(path, m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// `state`, `adjoint` or `control`.
    pub kind: String,
    pub dim: usize,
    pub n: Vec<usize>,
    pub extents: Vec<f64>,
    pub t_final: f64,
    pub nt: usize,
    #[serde(rename = "node")]
    pub nodes: Vec<ManifestNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestNode {
    pub index: usize,
    pub time: f64,
    pub files: BTreeMap<String, PathBuf>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self, IoError> {
        let text = fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
        toml::from_str(&text).map_err(|e| IoError::format(path, e.to_string()))
    }

    pub fn grid(&self) -> Result<Grid, String> {
        let g = match (self.dim, self.n.as_slice(), self.extents.as_slice()) {
            (1, [n], [l]) => Grid::new_1d(*n, *l),
            (2, [a, b], [x, y]) => Grid::new_2d([*a, *b], [*x, *y]),
            _ => return Err("inconsistent grid description".into()),
        };
        g.map_err(|e| e.to_string())
    }

    /// Reads one component at every listed node.
    pub fn load_component(&self, manifest_path: &Path, component: &str, grid: Grid) -> Result<Vec<Field>, IoError> {
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        self.nodes
            .iter()
            .map(|node| {
                let rel = node.files.get(component).ok_or_else(|| {
                    IoError::format(manifest_path, format!("node {} has no component `{component}`", node.index))
                })?;
                read_snapshot(&base.join(rel), grid)
            })
            .collect()
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|e| IoError::file(path, e))
}

fn nodes_to_write(len: usize, stride: usize) -> Vec<usize> {
    let mut nodes: Vec<usize> = (0..len).step_by(stride.max(1)).collect();
    if nodes.last() != Some(&(len - 1)) {
        nodes.push(len - 1);
    }
    nodes
}

/// Node index, node time and the named fields stored at that node.
type NodeFiles<'a> = (usize, f64, Vec<(&'a str, &'a Field)>);

fn write_frames(
    dir: &Path,
    kind: &str,
    grid: &Grid,
    tg: &chfree_core::TimeGrid,
    frames: Vec<NodeFiles<'_>>,
) -> Result<PathBuf, IoError> {
    let sub = dir.join(kind);
    fs::create_dir_all(&sub).map_err(|e| IoError::file(&sub, e))?;
    let mut nodes = Vec::with_capacity(frames.len());
    for (index, time, fields) in frames {
        let mut files = BTreeMap::new();
        for (name, field) in fields {
            let rel = PathBuf::from(kind).join(format!("{name}_{index:05}.chf"));
            write_snapshot(&dir.join(&rel), field)?;
            files.insert(name.to_string(), rel);
        }
        nodes.push(ManifestNode { index, time, files });
    }
    let manifest = Manifest {
        kind: kind.to_string(),
        dim: grid.dim(),
        n: grid.n()[..grid.dim()].to_vec(),
        extents: grid.extents()[..grid.dim()].to_vec(),
        t_final: tg.t_final(),
        nt: tg.nt(),
        nodes,
    };
    let path = dir.join(format!("{kind}_manifest.toml"));
    let text = toml::to_string(&manifest).map_err(|e| IoError::format(&path, e.to_string()))?;
    write_text(&path, &text)?;
    Ok(path)
}

fn trajectory_frames<'a, F: FieldTriple>(
    traj: &'a Trajectory<F>,
    names: [&'a str; 3],
    stride: usize,
) -> Vec<NodeFiles<'a>> {
    let tg = traj.time_grid();
    nodes_to_write(traj.len(), stride)
        .into_iter()
        .map(|k| {
            let [a, b, c] = traj.frame(k).fields();
            (k, tg.node(k), vec![(names[0], a), (names[1], b), (names[2], c)])
        })
        .collect()
}

/// Writes `state/*.chf` and `state_manifest.toml` under `dir`.
pub fn write_state(dir: &Path, traj: &StateTrajectory, stride: usize) -> Result<PathBuf, IoError> {
    let frames = trajectory_frames(traj, ["mu", "phi", "sigma"], stride);
    write_frames(dir, "state", traj.grid(), traj.time_grid(), frames)
}

/// Writes `adjoint/*.chf` and `adjoint_manifest.toml` under `dir`.
pub fn write_adjoint(dir: &Path, traj: &AdjointTrajectory, stride: usize) -> Result<PathBuf, IoError> {
    let frames = trajectory_frames(traj, ["q", "p", "r"], stride);
    write_frames(dir, "adjoint", traj.grid(), traj.time_grid(), frames)
}

/// Writes one snapshot per control interval; the listed time is the start
/// of the interval.
pub fn write_control(dir: &Path, u: &ControlField) -> Result<PathBuf, IoError> {
    let tg = u.time_grid();
    let frames = (0..tg.nt())
        .map(|k| (k, tg.node(k), vec![("u", u.interval(k))]))
        .collect();
    write_frames(dir, "control", u.grid(), tg, frames)
}

#[derive(Serialize)]
struct DiagnosticsRow {
    step: usize,
    newton_iters: usize,
    mass_residual: f64,
    delta_sep: f64,
}

pub fn write_diagnostics_csv(path: &Path, diagnostics: &[StepDiagnostics]) -> Result<(), IoError> {
    write_csv(
        path,
        diagnostics.iter().map(|d| DiagnosticsRow {
            step: d.step,
            newton_iters: d.newton_iters,
            mass_residual: d.mass_residual,
            delta_sep: d.delta_sep,
        }),
    )
}

#[derive(Serialize)]
struct BreakdownRow {
    iteration: usize,
    tau: f64,
    tracking_q: f64,
    tracking_omega: f64,
    nutrient_q: f64,
    tumour_mass: f64,
    linear_time: f64,
    quadratic_time: f64,
    control_energy: f64,
    relaxed_term: f64,
    total: f64,
}

impl BreakdownRow {
    fn new(iteration: usize, tau: f64, c: &CostBreakdown) -> Self {
        Self {
            iteration,
            tau,
            tracking_q: c.tracking_q,
            tracking_omega: c.tracking_omega,
            nutrient_q: c.nutrient_q,
            tumour_mass: c.tumour_mass,
            linear_time: c.linear_time,
            quadratic_time: c.quadratic_time,
            control_energy: c.control_energy,
            relaxed_term: c.relaxed_term,
            total: c.total,
        }
    }
}

/// One row per cost evaluation `(iteration, tau, breakdown)`.
pub fn write_breakdown_csv(path: &Path, rows: &[(usize, f64, CostBreakdown)]) -> Result<(), IoError> {
    write_csv(path, rows.iter().map(|(i, t, c)| BreakdownRow::new(*i, *t, c)))
}

#[derive(Serialize)]
struct HistoryRow {
    iteration: usize,
    tracking_q: f64,
    tracking_omega: f64,
    nutrient_q: f64,
    tumour_mass: f64,
    linear_time: f64,
    quadratic_time: f64,
    control_energy: f64,
    relaxed_term: f64,
    total: f64,
    proj_grad_u: f64,
    proj_grad_tau: f64,
    time_derivative: f64,
    tau: f64,
    time_case: &'static str,
}

pub fn write_history_csv(path: &Path, history: &[IterationRecord]) -> Result<(), IoError> {
    write_csv(
        path,
        history.iter().map(|h| {
            let c = &h.cost;
            HistoryRow {
                iteration: h.iteration,
                tracking_q: c.tracking_q,
                tracking_omega: c.tracking_omega,
                nutrient_q: c.nutrient_q,
                tumour_mass: c.tumour_mass,
                linear_time: c.linear_time,
                quadratic_time: c.quadratic_time,
                control_energy: c.control_energy,
                relaxed_term: c.relaxed_term,
                total: c.total,
                proj_grad_u: h.u_stationarity,
                proj_grad_tau: h.tau_stationarity,
                time_derivative: h.time_derivative,
                tau: h.tau,
                time_case: h.time_case.as_str(),
            }
        }),
    )
}

fn write_csv<R: Serialize>(path: &Path, rows: impl Iterator<Item = R>) -> Result<(), IoError> {
    let file = fs::File::create(path).map_err(|e| IoError::file(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    for row in rows {
        w.serialize(row).map_err(|e| IoError::format(path, e.to_string()))?;
    }
    let mut inner = w.into_inner().map_err(|e| IoError::format(path, e.to_string()))?;
    inner.flush().map_err(|e| IoError::file(path, e))
}

pub fn write_file(path: &Path, text: &str) -> Result<(), IoError> {
    write_text(path, text)
}
