//! Binary containers for datasets, trained models and regularization
//! matrices, each with a JSON sidecar (`<file>.json`).
//!
//! All containers are little-endian: a 4-byte magic, a `u32` format version,
//! a fixed header and then row-major `f64` data.
//!
//! | container | magic  | header                                                        |
//! |-----------|--------|---------------------------------------------------------------|
//! | dataset   | `KSDS` | rows u64, cols u64, dt f64, L f64, ic seed u64, role u8        |
//! | model     | `RCWM` | N u64, ⟨d⟩ ρ σ θ α f64, seed u64, M u64, W rows u64, cols u64   |
//! | matrix    | `RCRM` | dim u64, kind u8, K u64, samples u64                          |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ks::{DataRole, DataSet, KsConfig, StandardizationTransform};
use crate::linalg::DenseMatrix;
use crate::regularization::{RegularizationConfig, RegularizationKind, RegularizationMatrix};
use crate::reservoir::ReservoirHyperparams;
use crate::training::{OutputWeights, TrainedModel};

pub const FORMAT_VERSION: u32 = 1;

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

struct Writer<W: Write>(W);

impl<W: Write> Writer<W> {
    fn bytes(&mut self, b: &[u8]) -> Result<()> {
        self.0.write_all(b)?;
        Ok(())
    }
    fn u8(&mut self, v: u8) -> Result<()> {
        self.bytes(&[v])
    }
    fn u32(&mut self, v: u32) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }
    fn u64(&mut self, v: u64) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }
    fn f64(&mut self, v: f64) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }
    fn matrix_data(&mut self, m: &DenseMatrix) -> Result<()> {
        for v in m.as_slice() {
            self.f64(*v)?;
        }
        Ok(())
    }
}

struct Reader<R: Read>(R);

impl<R: Read> Reader<R> {
    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.0
            .read_exact(&mut b)
            .map_err(|e| Error::Format(format!("truncated container: {e}")))?;
        Ok(b)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.array::<1>()?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?)
            .map_err(|_| Error::Format("size does not fit in memory".into()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
    fn header(&mut self, magic: &[u8; 4]) -> Result<()> {
        let got = self.array::<4>()?;
        if &got != magic {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(&got),
                String::from_utf8_lossy(magic)
            )));
        }
        let version = self.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format version {version}"
            )));
        }
        Ok(())
    }
    fn matrix(&mut self, rows: usize, cols: usize) -> Result<DenseMatrix> {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Format("matrix size overflows".into()))?;
        let mut raw = Vec::new();
        (&mut self.0).take(len as u64 * 8).read_to_end(&mut raw)?;
        if raw.len() != len * 8 {
            return Err(Error::Format("truncated matrix data".into()));
        }
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        DenseMatrix::from_vec(rows, cols, data)
    }
    fn end(&mut self) -> Result<()> {
        let mut extra = [0u8; 1];
        if self.0.read(&mut extra)? != 0 {
            return Err(Error::Format("trailing bytes after container".into()));
        }
        Ok(())
    }
}

fn create(path: &Path) -> Result<Writer<BufWriter<File>>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(Writer(BufWriter::new(File::create(path)?)))
}

fn open(path: &Path) -> Result<Reader<BufReader<File>>> {
    Ok(Reader(BufReader::new(File::open(path)?)))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub format_version: u32,
    pub config: KsConfig,
    pub ic_seed: u64,
    pub role: DataRole,
    pub samples: usize,
    pub transform: StandardizationTransform,
}

pub fn write_dataset(path: &Path, ds: &DataSet) -> Result<()> {
    let mut w = create(path)?;
    w.bytes(b"KSDS")?;
    w.u32(FORMAT_VERSION)?;
    w.u64(ds.raw.rows() as u64)?;
    w.u64(ds.raw.cols() as u64)?;
    w.f64(ds.config.dt)?;
    w.f64(ds.config.length)?;
    w.u64(ds.ic_seed)?;
    w.u8(ds.role.code())?;
    w.matrix_data(&ds.raw)?;
    w.0.flush()?;
    write_json(
        &sidecar_path(path),
        &DatasetSidecar {
            format_version: FORMAT_VERSION,
            config: ds.config.clone(),
            ic_seed: ds.ic_seed,
            role: ds.role,
            samples: ds.raw.rows(),
            transform: ds.transform.clone(),
        },
    )
}

pub fn read_dataset(path: &Path) -> Result<DataSet> {
    let side: DatasetSidecar = read_json(&sidecar_path(path))?;
    let mut r = open(path)?;
    r.header(b"KSDS")?;
    let rows = r.usize()?;
    let cols = r.usize()?;
    let dt = r.f64()?;
    let length = r.f64()?;
    let ic_seed = r.u64()?;
    let role = DataRole::from_code(r.u8()?)?;
    let raw = r.matrix(rows, cols)?;
    r.end()?;
    if dt != side.config.dt
        || length != side.config.length
        || ic_seed != side.ic_seed
        || role != side.role
    {
        return Err(Error::Format(
            "dataset header disagrees with its sidecar".into(),
        ));
    }
    if side.transform.dim() != cols {
        return Err(Error::Format(
            "sidecar transform has the wrong dimension".into(),
        ));
    }
    Ok(DataSet {
        config: side.config,
        standardized: side.transform.standardize(&raw),
        raw,
        transform: side.transform,
        ic_seed,
        role,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSidecar {
    pub format_version: u32,
    pub hyperparams: ReservoirHyperparams,
    pub regularization: RegularizationConfig,
    pub transform: StandardizationTransform,
    /// Free-form provenance (data seeds, schedule, ...).
    #[serde(default)]
    pub provenance: serde_json::Value,
}

pub fn write_model(path: &Path, model: &TrainedModel, provenance: serde_json::Value) -> Result<()> {
    model.validate()?;
    let h = &model.hyperparams;
    let wm = model.weights.matrix();
    let mut w = create(path)?;
    w.bytes(b"RCWM")?;
    w.u32(FORMAT_VERSION)?;
    w.u64(h.nodes as u64)?;
    for v in [
        h.avg_degree,
        h.spectral_radius,
        h.input_scaling,
        h.input_bias,
        h.leak_rate,
    ] {
        w.f64(v)?;
    }
    w.u64(h.seed)?;
    w.u64(model.input_dim as u64)?;
    w.u64(wm.rows() as u64)?;
    w.u64(wm.cols() as u64)?;
    w.matrix_data(wm)?;
    w.0.flush()?;
    write_json(
        &sidecar_path(path),
        &ModelSidecar {
            format_version: FORMAT_VERSION,
            hyperparams: h.clone(),
            regularization: model.config,
            transform: model.transform.clone(),
            provenance,
        },
    )
}

pub fn read_model(path: &Path) -> Result<(TrainedModel, serde_json::Value)> {
    let side: ModelSidecar = read_json(&sidecar_path(path))?;
    let mut r = open(path)?;
    r.header(b"RCWM")?;
    let nodes = r.usize()?;
    let mut vals = [0.0; 5];
    for v in &mut vals {
        *v = r.f64()?;
    }
    let seed = r.u64()?;
    let input_dim = r.usize()?;
    let rows = r.usize()?;
    let cols = r.usize()?;
    let w = r.matrix(rows, cols)?;
    r.end()?;
    let hyperparams = ReservoirHyperparams {
        nodes,
        avg_degree: vals[0],
        spectral_radius: vals[1],
        input_scaling: vals[2],
        input_bias: vals[3],
        leak_rate: vals[4],
        seed,
    };
    if hyperparams != side.hyperparams {
        return Err(Error::Format(
            "model header disagrees with its sidecar".into(),
        ));
    }
    let model = TrainedModel {
        hyperparams,
        input_dim,
        weights: OutputWeights::new(w)?,
        config: side.regularization,
        transform: side.transform,
    };
    model.validate()?;
    Ok((model, side.provenance))
}

pub fn write_regularization_matrix(path: &Path, r: &RegularizationMatrix) -> Result<()> {
    let (k, samples) = match r.kind() {
        RegularizationKind::Tikhonov | RegularizationKind::Jacobian => (0, 0),
        RegularizationKind::Lmnt { k } | RegularizationKind::LmntMeanInput { k } => (k, 0),
        RegularizationKind::LmntReduced { k, samples } => (k, samples),
    };
    let mut w = create(path)?;
    w.bytes(b"RCRM")?;
    w.u32(FORMAT_VERSION)?;
    w.u64(r.dim() as u64)?;
    w.u8(r.kind().code())?;
    w.u64(k as u64)?;
    w.u64(samples as u64)?;
    w.matrix_data(r.matrix())?;
    w.0.flush()?;
    Ok(())
}

pub fn read_regularization_matrix(path: &Path) -> Result<RegularizationMatrix> {
    let mut r = open(path)?;
    r.header(b"RCRM")?;
    let dim = r.usize()?;
    let code = r.u8()?;
    let k = r.usize()?;
    let samples = r.usize()?;
    let kind = match code {
        1 => RegularizationKind::Tikhonov,
        2 => RegularizationKind::Jacobian,
        3 => RegularizationKind::Lmnt { k },
        4 => RegularizationKind::LmntReduced { k, samples },
        5 => RegularizationKind::LmntMeanInput { k },
        _ => return Err(Error::Format(format!("unknown regularization kind {code}"))),
    };
    let m = r.matrix(dim, dim)?;
    r.end()?;
    RegularizationMatrix::new(m, kind)
}

/// Plain CSV of a matrix, one row per line, with an optional header.
pub fn write_matrix_csv(path: &Path, m: &DenseMatrix, header: Option<&[String]>) -> Result<()> {
    let mut w = create(path)?;
    if let Some(h) = header {
        writeln!(w.0, "{}", h.join(","))?;
    }
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v:e}")).collect();
        writeln!(w.0, "{}", line.join(","))?;
    }
    w.0.flush()?;
    Ok(())
}
