//! `RM1F` feature files: magic, version u16, dim u32, rows u32, then
//! row-major little-endian f32 values.

use std::fs;
use std::path::{Path, PathBuf};

use crate::classifier::Label;
use crate::error::{Error, Result};
use crate::io::write_atomic;

const MAGIC: &[u8; 4] = b"RM1F";
const VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 4 + 4;

/// Dense row-major matrix of stored features.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    dim: usize,
    values: Vec<f32>,
}

impl FeatureMatrix {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            values: Vec::new(),
        }
    }

    pub fn from_rows<R: AsRef<[f32]>>(dim: usize, rows: &[R]) -> Result<Self> {
        let mut m = Self::new(dim);
        for r in rows {
            m.push_row(r.as_ref())?;
        }
        Ok(m)
    }

    pub fn push_row(&mut self, row: &[f32]) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "row has {} values, expected {}",
                row.len(),
                self.dim
            )));
        }
        self.values.extend_from_slice(row);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.values.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f32]> {
        self.values.chunks_exact(self.dim.max(1))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.rows() as u32).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, String> {
        if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
            return Err("not an RM1F feature file".into());
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(format!("unsupported RM1F version {version}"));
        }
        let dim = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
        let rows = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
        let expected = HEADER_LEN + 4 * dim * rows;
        if bytes.len() != expected {
            return Err(format!(
                "RM1F size mismatch: header says {rows}x{dim} ({expected} bytes), file has {}",
                bytes.len()
            ));
        }
        let values = bytes[HEADER_LEN..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self { dim, values })
    }
}

pub fn write_feature_file(path: &Path, m: &FeatureMatrix) -> Result<()> {
    let bytes = m.to_bytes();
    write_atomic(path, |w| w.write_all(&bytes))
}

pub fn read_feature_file(path: &Path) -> Result<FeatureMatrix> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    FeatureMatrix::from_bytes(&bytes).map_err(|m| Error::format(path, m))
}

/// CSV export, one row per image with the label first.
pub fn write_feature_csv(path: &Path, labels: &[String], m: &FeatureMatrix) -> Result<()> {
    if labels.len() != m.rows() {
        return Err(Error::InvalidInput(format!(
            "{} labels for {} feature rows",
            labels.len(),
            m.rows()
        )));
    }
    write_atomic(path, |w| {
        let mut header = String::from("label");
        for k in 0..m.dim() {
            header.push_str(&format!(",f{k}"));
        }
        writeln!(w, "{header}")?;
        for (label, row) in labels.iter().zip(m.iter_rows()) {
            write!(w, "{label}")?;
            for v in row {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
}

/// `<features>.labels`: one label per feature row.
pub fn label_sidecar_path(features: &Path) -> PathBuf {
    let mut p = features.as_os_str().to_owned();
    p.push(".labels");
    PathBuf::from(p)
}

pub fn write_labels(path: &Path, labels: &[Label]) -> Result<()> {
    write_atomic(path, |w| {
        for l in labels {
            writeln!(w, "{l}")?;
        }
        Ok(())
    })
}

pub fn read_labels(path: &Path) -> Result<Vec<Label>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            l.parse().map_err(|e: Error| Error::Parse {
                path: path.to_path_buf(),
                line: k + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("x.rm1f");
        let p = label_sidecar_path(&f);
        assert_eq!(p, dir.path().join("x.rm1f.labels"));
        let labels = vec![Label::Tampered, Label::Authentic];
        write_labels(&p, &labels).unwrap();
        assert_eq!(read_labels(&p).unwrap(), labels);
        fs::write(&p, "authentic\nspliced\n").unwrap();
        assert!(matches!(read_labels(&p), Err(Error::Parse { line: 2, .. })));
    }
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let m = FeatureMatrix::from_rows(2, &[[1.0f32, -0.5]]).unwrap();
        let b = m.to_bytes();
        assert_eq!(&b[..4], b"RM1F");
        assert_eq!(&b[4..6], &[1, 0]);
        assert_eq!(&b[6..10], &[2, 0, 0, 0]);
        assert_eq!(&b[10..14], &[1, 0, 0, 0]);
        assert_eq!(&b[14..18], &1.0f32.to_le_bytes());
        assert_eq!(b.len(), 22);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(FeatureMatrix::from_bytes(b"RM1Fxx").is_err());
        let mut b = FeatureMatrix::from_rows(2, &[[1.0f32, 2.0]])
            .unwrap()
            .to_bytes();
        b.pop();
        assert!(FeatureMatrix::from_bytes(&b).is_err());
        b[0] = b'X';
        assert!(FeatureMatrix::from_bytes(&b).is_err());
    }

    #[test]
    fn csv_export() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let m = FeatureMatrix::from_rows(2, &[[0.25f32, 0.75], [1.0, 0.0]]).unwrap();
        write_feature_csv(&path, &["authentic".into(), "tampered".into()], &m).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "label,f0,f1\nauthentic,0.25,0.75\ntampered,1,0\n");
    }

    proptest! {
        #[test]
        fn round_trip(dim in 1usize..20, rows in proptest::collection::vec(proptest::collection::vec(any::<f32>(), 20), 0..6)) {
            let rows: Vec<Vec<f32>> = rows.into_iter().map(|r| r[..dim].to_vec()).collect();
            let m = FeatureMatrix::from_rows(dim, &rows).unwrap();
            let back = FeatureMatrix::from_bytes(&m.to_bytes()).unwrap();
            prop_assert_eq!(back.to_bytes(), m.to_bytes());
        }
    }
}
