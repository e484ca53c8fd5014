//! On-disk formats for passages and labels.
//!
//! A passage is stored as two files sharing a stem:
//!
//! * `<id>.meta.toml`: `id`, `sample_rate`, `sensor_offsets`,
//!   `wlm_spacing`, `wlm_spacing_uncertainty`.
//! * `<id>.csv`: one sample per row, columns
//!   `G1, G2, accel_0, accel_1, ...`, comma separated, `.` decimal point.
//!
//! Labels live in `<id>.labels.json`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{build_binary_labels, LabelSet, PassageRecord};

pub const META_SUFFIX: &str = ".meta.toml";
pub const MATRIX_SUFFIX: &str = ".csv";
pub const LABEL_SUFFIX: &str = ".labels.json";

/// Write through a temporary sibling and rename, so readers never observe
/// a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassageMeta {
    pub id: String,
    #[serde(default = "default_sample_rate")]
    pub sample_rate: f64,
    pub sensor_offsets: Vec<f64>,
    #[serde(default = "default_wlm_spacing")]
    pub wlm_spacing: f64,
    #[serde(default = "default_wlm_spacing_uncertainty")]
    pub wlm_spacing_uncertainty: f64,
}

fn default_sample_rate() -> f64 {
    crate::ingest::DEFAULT_SAMPLE_RATE
}
fn default_wlm_spacing() -> f64 {
    crate::ingest::DEFAULT_WLM_SPACING
}
fn default_wlm_spacing_uncertainty() -> f64 {
    crate::ingest::DEFAULT_WLM_SPACING_UNCERTAINTY
}

/// Parse a whitespace-, comma- or semicolon-separated numeric matrix.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_matrix(text: &str, path: &Path) -> Result<Array2<f64>> {
    let mut data = Vec::new();
    let mut ncols = None;
    let mut nrows = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let before = data.len();
        for tok in line
            .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            let v: f64 = tok.parse().map_err(|_| {
                Error::format(path, format!("line {}: cannot parse {tok:?} as a number", lineno + 1))
            })?;
            data.push(v);
        }
        let width = data.len() - before;
        match ncols {
            None => ncols = Some(width),
            Some(n) if n != width => {
                return Err(Error::format(
                    path,
                    format!("line {}: {width} columns, expected {n}", lineno + 1),
                ))
            }
            _ => {}
        }
        nrows += 1;
    }
    let ncols = ncols.unwrap_or(0);
    Array2::from_shape_vec((nrows, ncols), data).map_err(|e| Error::format(path, e.to_string()))
}

pub fn format_matrix(m: &Array2<f64>) -> String {
    let mut out = String::with_capacity(m.len() * 12);
    for row in m.rows() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn passage_paths(dir: &Path, id: &str) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("{id}{META_SUFFIX}")),
        dir.join(format!("{id}{MATRIX_SUFFIX}")),
    )
}

pub fn write_passage(dir: &Path, record: &PassageRecord) -> Result<()> {
    let meta = PassageMeta {
        id: record.id.clone(),
        sample_rate: record.sample_rate,
        sensor_offsets: record.sensor_offsets.clone(),
        wlm_spacing: record.wlm_spacing,
        wlm_spacing_uncertainty: record.wlm_spacing_uncertainty,
    };
    let (meta_path, matrix_path) = passage_paths(dir, &record.id);
    let meta_text = toml::to_string(&meta).map_err(|e| Error::format(&meta_path, e.to_string()))?;
    write_atomic(&meta_path, meta_text.as_bytes())?;

    let n = record.n_samples();
    let mut combined = Array2::zeros((n, 2 + record.n_sensors()));
    combined.slice_mut(ndarray::s![.., 0..2]).assign(&record.wheel_load);
    combined.slice_mut(ndarray::s![.., 2..]).assign(&record.accel);
    write_atomic(&matrix_path, format_matrix(&combined).as_bytes())
}

pub fn read_passage(dir: &Path, id: &str) -> Result<PassageRecord> {
    let (meta_path, matrix_path) = passage_paths(dir, id);
    let meta_text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: PassageMeta =
        toml::from_str(&meta_text).map_err(|e| Error::format(&meta_path, e.to_string()))?;
    let matrix_text = fs::read_to_string(&matrix_path).map_err(|e| Error::io(&matrix_path, e))?;
    let m = parse_matrix(&matrix_text, &matrix_path)?;
    if m.ncols() < 3 {
        return Err(Error::format(
            &matrix_path,
            format!("{} columns; need G1, G2 and at least one sensor", m.ncols()),
        ));
    }
    let record = PassageRecord {
        id: meta.id,
        sample_rate: meta.sample_rate,
        wheel_load: m.slice(ndarray::s![.., 0..2]).to_owned(),
        accel: m.slice(ndarray::s![.., 2..]).to_owned(),
        sensor_offsets: meta.sensor_offsets,
        wlm_spacing: meta.wlm_spacing,
        wlm_spacing_uncertainty: meta.wlm_spacing_uncertainty,
    };
    record.validate()?;
    Ok(record)
}

/// Passage ids present in `dir`, sorted.
pub fn list_passages(dir: &Path) -> Result<Vec<String>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut ids = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        if let Some(id) = name.to_str().and_then(|n| n.strip_suffix(META_SUFFIX)) {
            ids.push(id.to_string());
        }
    }
    ids.sort();
    Ok(ids)
}

/// Serialized label set; targets are rebuilt from the crossing indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDocument {
    pub id: String,
    pub n_samples: usize,
    pub n_sensors: usize,
    pub sample_rate: f64,
    pub axle_velocities: Vec<f64>,
    /// Row per axle, column per sensor.
    pub crossing_indices: Vec<Vec<usize>>,
    pub uncertainty: Vec<Vec<f64>>,
}

impl LabelDocument {
    pub fn new(id: &str, n_samples: usize, sample_rate: f64, labels: &LabelSet) -> Self {
        Self {
            id: id.to_string(),
            n_samples,
            n_sensors: labels.n_sensors(),
            sample_rate,
            axle_velocities: labels.axle_velocities.clone(),
            crossing_indices: labels.crossing_indices.rows().into_iter().map(|r| r.to_vec()).collect(),
            uncertainty: labels.uncertainty.rows().into_iter().map(|r| r.to_vec()).collect(),
        }
    }

    pub fn to_label_set(&self) -> Result<LabelSet> {
        let n_a = self.axle_velocities.len();
        let flat_idx: Vec<usize> = self.crossing_indices.iter().flatten().copied().collect();
        let flat_unc: Vec<f64> = self.uncertainty.iter().flatten().copied().collect();
        let crossing = Array2::from_shape_vec((n_a, self.n_sensors), flat_idx)
            .map_err(|e| Error::InvalidLabels(format!("{}: {e}", self.id)))?;
        let uncertainty = Array2::from_shape_vec((n_a, self.n_sensors), flat_unc)
            .map_err(|e| Error::InvalidLabels(format!("{}: {e}", self.id)))?;
        let targets = build_binary_labels(&crossing, self.n_samples)?;
        let labels = LabelSet {
            axle_velocities: self.axle_velocities.clone(),
            crossing_indices: crossing,
            uncertainty,
            targets,
        };
        labels.validate(self.n_samples)?;
        Ok(labels)
    }
}

pub fn write_labels(dir: &Path, doc: &LabelDocument) -> Result<()> {
    let path = dir.join(format!("{}{LABEL_SUFFIX}", doc.id));
    let text = serde_json::to_string_pretty(doc).map_err(|e| Error::format(&path, e.to_string()))?;
    write_atomic(&path, text.as_bytes())
}

pub fn read_labels(dir: &Path, id: &str) -> Result<LabelDocument> {
    let path = dir.join(format!("{id}{LABEL_SUFFIX}"));
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))
}

/// Build a native passage from separately published text matrices: one
/// acceleration matrix (`n_samples x n_sensors`) and one wheel-load matrix
/// whose first two columns are G1 and G2.
pub fn convert_text_matrices(
    meta: PassageMeta,
    accel_path: &Path,
    wheel_load_path: &Path,
) -> Result<PassageRecord> {
    let read = |p: &Path| -> Result<Array2<f64>> {
        let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        parse_matrix(&text, p)
    };
    let accel = read(accel_path)?;
    let wheel = read(wheel_load_path)?;
    if wheel.ncols() < 2 {
        return Err(Error::format(wheel_load_path, "need at least two wheel-load columns"));
    }
    if wheel.nrows() != accel.nrows() {
        return Err(Error::format(
            wheel_load_path,
            format!("{} rows but acceleration has {}", wheel.nrows(), accel.nrows()),
        ));
    }
    let record = PassageRecord {
        id: meta.id,
        sample_rate: meta.sample_rate,
        accel,
        wheel_load: wheel.slice(ndarray::s![.., 0..2]).to_owned(),
        sensor_offsets: meta.sensor_offsets,
        wlm_spacing: meta.wlm_spacing,
        wlm_spacing_uncertainty: meta.wlm_spacing_uncertainty,
    };
    record.validate()?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn passage_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().to_path_buf();
        let record = PassageRecord {
            id: "p001".into(),
            sample_rate: 600.0,
            accel: array![[0.1, -0.25], [1e-9, 3.0], [0.0, 0.5]],
            wheel_load: array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            sensor_offsets: vec![3.5, 12.0],
            wlm_spacing: 14.4,
            wlm_spacing_uncertainty: 0.2,
        };
        write_passage(&dir, &record).unwrap();
        assert_eq!(list_passages(&dir).unwrap(), vec!["p001".to_string()]);
        assert_eq!(read_passage(&dir, "p001").unwrap(), record);
    }

    #[test]
    fn parse_rejects_ragged_rows() {
        let p = Path::new("x");
        assert!(parse_matrix("1,2\n3\n", p).is_err());
        assert!(parse_matrix("1,abc\n", p).is_err());
        let m = parse_matrix("# header\n1 2\n\n3\t4\n", p).unwrap();
        assert_eq!(m, array![[1.0, 2.0], [3.0, 4.0]]);
    }
}
