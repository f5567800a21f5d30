//! Snapshot, probe and manifest writers. Floats are written with `{:.17e}`
//! so identical states produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::mesh::{Point3, SimplicialSurface};
use crate::solver::{FieldState, Mode};

fn field_names(mode: Mode) -> (&'static str, &'static str) {
    // (edge field, face field)
    match mode {
        Mode::Te => ("E", "H_z"),
        Mode::Tm => ("H", "E_z"),
    }
}

/// Lowest-order Whitney reconstruction of an edge cochain at each face
/// barycenter: for edge `a → b`, `W = (∇λ_b − ∇λ_a)/3` there.
pub fn whitney_barycenter_vectors(surface: &SimplicialSurface, edge_values: &[f64]) -> Vec<Point3> {
    let v = surface.vertices();
    surface
        .faces()
        .iter()
        .map(|&[i, j, k]| {
            let n = (v[j] - v[i]).cross(&(v[k] - v[i]));
            let two_area = n.norm();
            let unit = n / two_area;
            // ∇λ at corner p, opposite edge q → r in winding order
            let grad = |q: usize, r: usize| unit.cross(&(v[r] - v[q])) / two_area;
            let grads = [(i, grad(j, k)), (j, grad(k, i)), (k, grad(i, j))];
            let g = |vertex: usize| grads.iter().find(|(w, _)| *w == vertex).map(|(_, g)| *g).unwrap();
            let mut out = Point3::zeros();
            for (a, b) in [(i, j), (j, k), (k, i)] {
                let e = surface.edge_between(a, b).expect("face edge exists");
                let [tail, head] = surface.edges()[e];
                out += edge_values[e] * (g(head) - g(tail)) / 3.0;
            }
            out
        })
        .collect()
}

pub fn vtk_snapshot(surface: &SimplicialSurface, state: &FieldState) -> String {
    let (edge_name, face_name) = field_names(state.mode);
    let mut out = String::new();
    let nf = surface.n_faces();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "{} step {} t {:.17e}", state.mode.name(), state.n, state.t);
    let _ = writeln!(out, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(out, "POINTS {} double", surface.n_vertices());
    for p in surface.vertices() {
        let _ = writeln!(out, "{:.17e} {:.17e} {:.17e}", p.x, p.y, p.z);
    }
    let _ = writeln!(out, "CELLS {nf} {}", 4 * nf);
    for [a, b, c] in surface.faces() {
        let _ = writeln!(out, "3 {a} {b} {c}");
    }
    let _ = writeln!(out, "CELL_TYPES {nf}");
    for _ in 0..nf {
        out.push_str("5\n");
    }
    let _ = writeln!(out, "CELL_DATA {nf}");
    let _ = writeln!(out, "SCALARS {face_name} double 1\nLOOKUP_TABLE default");
    for y in state.face_field() {
        let _ = writeln!(out, "{y:.17e}");
    }
    let _ = writeln!(out, "VECTORS {edge_name}_whitney double");
    for w in whitney_barycenter_vectors(surface, state.edge_field()) {
        let _ = writeln!(out, "{:.17e} {:.17e} {:.17e}", w.x, w.y, w.z);
    }
    out
}

/// Raw cochain values: edge values are integrals along the oriented edge,
/// face values are pointwise.
pub fn field_csv(state: &FieldState) -> String {
    let (edge_name, face_name) = field_names(state.mode);
    let mut out = String::from("element,index,quantity,value\n");
    for (i, x) in state.edge_field().iter().enumerate() {
        let _ = writeln!(out, "edge,{i},{edge_name},{x:.17e}");
    }
    for (i, y) in state.face_field().iter().enumerate() {
        let _ = writeln!(out, "face,{i},{face_name},{y:.17e}");
    }
    out
}

/// Probe columns sample integrated cochain values (edge integrals, face
/// values as stored), never interpolated point values.
pub struct ProbeSet {
    columns: Vec<(bool, usize)>,
}

impl ProbeSet {
    pub fn new(mode: Mode, probes_e: &[usize], probes_h: &[usize]) -> Self {
        let e_on_edges = mode == Mode::Te;
        let columns = probes_e
            .iter()
            .map(|&i| (e_on_edges, i))
            .chain(probes_h.iter().map(|&i| (!e_on_edges, i)))
            .collect();
        Self { columns }
    }

    pub fn header(&self, mode: Mode) -> String {
        let (edge_name, face_name) = field_names(mode);
        let mut out = String::from("step,time");
        for &(on_edge, i) in &self.columns {
            if on_edge {
                let _ = write!(out, ",{edge_name}_edge{i}_integrated");
            } else {
                let _ = write!(out, ",{face_name}_face{i}");
            }
        }
        out.push('\n');
        out
    }

    pub fn row(&self, state: &FieldState) -> String {
        let mut out = format!("{},{:.17e}", state.n, state.t);
        for &(on_edge, i) in &self.columns {
            let v = if on_edge { state.edge_field()[i] } else { state.face_field()[i] };
            let _ = write!(out, ",{v:.17e}");
        }
        out.push('\n');
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Running,
    Complete,
    Failed,
}

/// Output directory bookkeeping for a run.
pub struct RunOutput {
    dir: PathBuf,
    vtk: bool,
    csv: bool,
    probes: BufWriter<fs::File>,
    energy: BufWriter<fs::File>,
    snapshots: Vec<String>,
    warnings: Vec<String>,
}

impl RunOutput {
    pub fn create(dir: &Path, vtk: bool, csv: bool, probe_header: &str) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        let mut probes = BufWriter::new(fs::File::create(dir.join("probes.csv"))?);
        probes.write_all(probe_header.as_bytes())?;
        let mut energy = BufWriter::new(fs::File::create(dir.join("energy.csv"))?);
        energy.write_all(b"step,time,energy,gauss_residual_max\n")?;
        Ok(Self {
            dir: dir.to_path_buf(),
            vtk,
            csv,
            probes,
            energy,
            snapshots: Vec::new(),
            warnings: Vec::new(),
        })
    }

    /// Recorded in the manifest on every checkpoint.
    pub fn warn(&mut self, msg: &str) {
        self.warnings.push(msg.to_string());
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn record(&mut self, probe_row: &str, state: &FieldState, energy: f64, gauss: f64) -> io::Result<()> {
        self.probes.write_all(probe_row.as_bytes())?;
        writeln!(self.energy, "{},{:.17e},{energy:.17e},{gauss:.17e}", state.n, state.t)
    }

    pub fn snapshot(&mut self, surface: &SimplicialSurface, state: &FieldState) -> io::Result<()> {
        let stem = format!("snapshot_{:06}", state.n);
        if self.vtk {
            fs::write(self.dir.join(format!("{stem}.vtk")), vtk_snapshot(surface, state))?;
            self.snapshots.push(format!("{stem}.vtk"));
        }
        if self.csv {
            fs::write(self.dir.join(format!("{stem}.csv")), field_csv(state))?;
            self.snapshots.push(format!("{stem}.csv"));
        }
        Ok(())
    }

    /// Flushes the streamed CSVs and rewrites the manifest.
    pub fn checkpoint(&mut self, status: RunStatus, last_step: u64, planned: usize, note: &str) -> io::Result<()> {
        self.probes.flush()?;
        self.energy.flush()?;
        let mut m = String::new();
        let label = match status {
            RunStatus::Running => "running",
            RunStatus::Complete => "complete",
            RunStatus::Failed => "incomplete",
        };
        let _ = writeln!(m, "status = {label}");
        let _ = writeln!(m, "last_completed_step = {last_step}");
        let _ = writeln!(m, "planned_steps = {planned}");
        if !note.is_empty() {
            let _ = writeln!(m, "error = {}", note.replace('\n', " "));
        }
        for w in &self.warnings {
            let _ = writeln!(m, "warning = {w}");
        }
        let _ = writeln!(m, "probes = probes.csv (integrated cochain values)");
        let _ = writeln!(m, "energy = energy.csv");
        for s in &self.snapshots {
            let _ = writeln!(m, "snapshot = {s}");
        }
        fs::write(self.dir.join("manifest.txt"), m)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}
