//! On-disk feature tables.
//!
//! A table is a `manifest.json` describing the records plus a raw payload of
//! `n × d` little-endian binary32 values in row-major order. Small fixtures
//! can also be kept as CSV with the header `id,label,sex,age,f0,...,f{d-1}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureRecord, Sex};
use crate::error::{Error, Result};
use crate::util::write_atomic;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub id: String,
    pub label: String,
    pub sex: Sex,
    pub age: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub n: usize,
    pub d: usize,
    pub dtype: String,
    pub byte_order: String,
    pub layout: String,
    pub features_file: String,
    pub schema: Vec<String>,
    pub records: Vec<ManifestRecord>,
}

impl Manifest {
    fn check_encoding(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::Format(format!(
                "manifest version {} (expected 1)",
                self.version
            )));
        }
        for (field, value, expected) in [
            ("dtype", &self.dtype, "f32"),
            ("byte_order", &self.byte_order, "little"),
            ("layout", &self.layout, "row-major"),
        ] {
            if value != expected {
                return Err(Error::Format(format!(
                    "{field} is {value:?}, expected {expected:?}"
                )));
            }
        }
        if self.records.len() != self.n {
            return Err(Error::Format(format!(
                "manifest declares n={} but lists {} records",
                self.n,
                self.records.len()
            )));
        }
        Ok(())
    }
}

fn payload_path(manifest_path: &Path, features_file: &str) -> PathBuf {
    let file = Path::new(features_file);
    if file.is_absolute() {
        return file.to_path_buf();
    }
    manifest_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(file)
}

pub fn load_dataset(manifest_path: impl AsRef<Path>) -> Result<Dataset> {
    let manifest_path = manifest_path.as_ref();
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::json(manifest_path, e))?;
    manifest.check_encoding()?;
    if manifest.d == 0 {
        return Err(Error::Format("d must be at least 1".into()));
    }

    let bin_path = payload_path(manifest_path, &manifest.features_file);
    let bytes = fs::read(&bin_path).map_err(|e| Error::io(&bin_path, e))?;
    let expected = 4 * manifest.n as u64 * manifest.d as u64;
    let actual = bytes.len() as u64;
    if actual < expected {
        return Err(Error::ShortPayload {
            path: bin_path,
            expected,
            actual,
        });
    }
    if actual > expected {
        return Err(Error::Format(format!(
            "payload {} has {actual} bytes but n×d×4 = {expected}",
            bin_path.display()
        )));
    }

    let row_bytes = 4 * manifest.d;
    let records = manifest
        .records
        .into_iter()
        .zip(bytes.chunks_exact(row_bytes))
        .map(|(meta, chunk)| FeatureRecord {
            id: meta.id,
            features: chunk
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect(),
            sex: meta.sex,
            age: meta.age,
            label: meta.label,
        })
        .collect();

    Dataset::new(
        records,
        manifest.d,
        manifest.schema,
        manifest_path.display().to_string(),
    )
}

/// Writes `dataset` as a manifest at `manifest_path` plus a payload file next to it.
///
/// The payload is named after the manifest stem (`manifest.json` → `manifest.f32`).
pub fn write_dataset(dataset: &Dataset, manifest_path: impl AsRef<Path>) -> Result<()> {
    let manifest_path = manifest_path.as_ref();
    let stem = manifest_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("features");
    let features_file = format!("{stem}.f32");

    let mut payload = Vec::with_capacity(4 * dataset.len() * dataset.dim());
    for record in dataset.records() {
        for v in &record.features {
            payload.extend_from_slice(&v.to_le_bytes());
        }
    }

    let manifest = Manifest {
        version: MANIFEST_VERSION,
        n: dataset.len(),
        d: dataset.dim(),
        dtype: "f32".into(),
        byte_order: "little".into(),
        layout: "row-major".into(),
        features_file: features_file.clone(),
        schema: dataset.schema().to_vec(),
        records: dataset
            .records()
            .iter()
            .map(|r| ManifestRecord {
                id: r.id.clone(),
                label: r.label.clone(),
                sex: r.sex,
                age: r.age,
            })
            .collect(),
    };
    let mut json =
        serde_json::to_vec_pretty(&manifest).map_err(|e| Error::json(manifest_path, e))?;
    json.push(b'\n');

    // payload first: a manifest never points at a missing payload
    write_atomic(&payload_path(manifest_path, &features_file), &payload)?;
    write_atomic(manifest_path, &json)
}

/// Reads the CSV fixture form. When `schema` is `None` classes are ordered by
/// first appearance.
pub fn read_csv(path: impl AsRef<Path>, schema: Option<Vec<String>>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let fixed = ["id", "label", "sex", "age"];
    if headers.len() < 5 || headers.iter().take(4).ne(fixed) {
        return Err(Error::Format(format!(
            "{}: header must start with id,label,sex,age followed by feature columns",
            path.display()
        )));
    }
    let dim = headers.len() - 4;
    for (j, name) in headers.iter().skip(4).enumerate() {
        if name != format!("f{j}") {
            return Err(Error::Format(format!(
                "column {} should be f{j}, found {name:?}",
                j + 4
            )));
        }
    }

    let mut records = Vec::new();
    let mut seen_classes: Vec<String> = Vec::new();
    for row in reader.records() {
        let row = row?;
        let id = row[0].to_string();
        let label = row[1].to_string();
        let bad = |reason: String| Error::InvalidRecord {
            id: id.clone(),
            reason,
        };
        let sex: Sex = row[2].parse().map_err(bad)?;
        let age: f64 = row[3]
            .trim()
            .parse()
            .map_err(|_| bad(format!("age {:?} is not a number", &row[3])))?;
        let features = row
            .iter()
            .skip(4)
            .map(|v| {
                v.trim()
                    .parse::<f32>()
                    .map_err(|_| bad(format!("feature value {v:?} is not a number")))
            })
            .collect::<Result<Vec<f32>>>()?;
        if !seen_classes.contains(&label) {
            seen_classes.push(label.clone());
        }
        records.push(FeatureRecord {
            id,
            features,
            sex,
            age,
            label,
        });
    }
    Dataset::new(
        records,
        dim,
        schema.unwrap_or(seen_classes),
        path.display().to_string(),
    )
}

pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string(), "label".into(), "sex".into(), "age".into()];
    header.extend((0..dataset.dim()).map(|j| format!("f{j}")));
    writer.write_record(&header)?;
    for r in dataset.records() {
        let mut row = vec![
            r.id.clone(),
            r.label.clone(),
            r.sex.to_string(),
            r.age.to_string(),
        ];
        row.extend(r.features.iter().map(|v| v.to_string()));
        writer.write_record(&row)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Format(format!("csv buffer: {e}")))?;
    write_atomic(path.as_ref(), &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_table(dir: &Path, n: usize, d: usize, payload_len: usize) -> PathBuf {
        let records: Vec<_> = (0..n)
            .map(|i| {
                serde_json::json!({"id": format!("s{i}"), "label": if i % 2 == 0 { "A" } else { "B" }, "sex": "F", "age": 60})
            })
            .collect();
        let manifest = serde_json::json!({
            "version": 1, "n": n, "d": d, "dtype": "f32", "byte_order": "little",
            "layout": "row-major", "features_file": "x.bin", "schema": ["A", "B"],
            "records": records,
        });
        let path = dir.join("manifest.json");
        fs::write(&path, manifest.to_string()).unwrap();
        let payload: Vec<u8> = (0..payload_len).map(|i| (i % 7) as u8).collect();
        fs::write(dir.join("x.bin"), payload).unwrap();
        path
    }

    #[test]
    fn smallest_table_loads() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_table(dir.path(), 2, 3, 24);
        let ds = load_dataset(&path).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim(), 3);
        assert!(ds.records().iter().all(|r| r.features.len() == 3));
        assert_eq!(ds.ids(), vec!["s0", "s1"]);
    }

    #[test]
    fn short_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_table(dir.path(), 2, 3, 20);
        match load_dataset(&path) {
            Err(Error::ShortPayload {
                expected, actual, ..
            }) => {
                assert_eq!((expected, actual), (24, 20));
            }
            other => panic!("expected short payload, got {other:?}"),
        }
    }

    #[test]
    fn oversized_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_table(dir.path(), 2, 3, 28);
        assert!(matches!(load_dataset(&path), Err(Error::Format(_))));
    }

    #[test]
    fn non_finite_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_table(dir.path(), 1, 1, 4);
        fs::write(dir.path().join("x.bin"), f32::INFINITY.to_le_bytes()).unwrap();
        assert!(matches!(load_dataset(&path), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn wrong_dtype_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_table(dir.path(), 1, 1, 4);
        let text = fs::read_to_string(&path)
            .unwrap()
            .replace("\"f32\"", "\"f64\"");
        fs::write(&path, text).unwrap();
        assert!(matches!(load_dataset(&path), Err(Error::Format(_))));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("t.csv");
        fs::write(
            &csv_path,
            "id,label,sex,age,f0,f1\n\"a,1\",B,F,70,1.5,-2\nb,A,M,55.5,0,3.25\n",
        )
        .unwrap();
        let ds = read_csv(&csv_path, None).unwrap();
        assert_eq!(ds.schema(), &["B".to_string(), "A".to_string()]);
        assert_eq!(ds.records()[0].id, "a,1");
        assert_eq!(ds.records()[1].features, vec![0.0, 3.25]);

        let out = dir.path().join("u.csv");
        write_csv(&ds, &out).unwrap();
        let back = read_csv(&out, Some(ds.schema().to_vec())).unwrap();
        assert_eq!(back.records(), ds.records());
    }
}
