use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use crate::classifier::Label;
use crate::error::{Error, Result};
use crate::io::write_atomic;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: Label,
    pub class: Option<String>,
    pub group: Option<String>,
}

/// Validated list of labeled images.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DatasetManifest {
    entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(&e.path) {
                return Err(Error::InvalidInput(format!(
                    "duplicate manifest path {}",
                    e.path.display()
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn label_counts(&self) -> BTreeMap<Label, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.entries {
            *counts.entry(e.label).or_insert(0) += 1;
        }
        counts
    }

    /// Equal numbers of authentic and tampered entries.
    pub fn is_balanced(&self) -> bool {
        let c = self.label_counts();
        c.get(&Label::Authentic) == c.get(&Label::Tampered)
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            entries: indices.iter().map(|&i| self.entries[i].clone()).collect(),
        }
    }

    /// Writes `path,label[,class][,group]` with paths relative to the
    /// manifest's directory when possible.
    pub fn write(&self, path: &Path) -> Result<()> {
        let base = path.parent().unwrap_or(Path::new(""));
        let has_class = self.entries.iter().any(|e| e.class.is_some());
        let has_group = self.entries.iter().any(|e| e.group.is_some());
        let mut header = vec!["path", "label"];
        if has_class {
            header.push("class");
        }
        if has_group {
            header.push("group");
        }
        let mut buf = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&header)
                .map_err(|e| Error::InvalidInput(e.to_string()))?;
            for e in &self.entries {
                let rel = e.path.strip_prefix(base).unwrap_or(&e.path);
                let mut rec = vec![rel.to_string_lossy().into_owned(), e.label.to_string()];
                if has_class {
                    rec.push(e.class.clone().unwrap_or_default());
                }
                if has_group {
                    rec.push(e.group.clone().unwrap_or_default());
                }
                w.write_record(&rec)
                    .map_err(|e| Error::InvalidInput(e.to_string()))?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
        write_atomic(path, |w| w.write_all(&buf))
    }
}

/// Reads a manifest CSV with header `path,label[,class][,group]`. Relative
/// paths resolve against the manifest's directory.
pub fn ingest_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let path_col = col("path").ok_or_else(|| parse_err(1, "missing `path` column".into()))?;
    let label_col = col("label").ok_or_else(|| parse_err(1, "missing `label` column".into()))?;
    let class_col = col("class");
    let group_col = col("group");

    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |c: usize| record.get(c).filter(|s| !s.is_empty());
        let rel = field(path_col).ok_or_else(|| parse_err(line, "empty path".into()))?;
        let label_text = field(label_col).ok_or_else(|| parse_err(line, "empty label".into()))?;
        let label: Label = label_text
            .parse()
            .map_err(|e: Error| parse_err(line, e.to_string()))?;
        let full = base.join(rel);
        if !seen.insert(full.clone()) {
            return Err(parse_err(line, format!("duplicate path {rel}")));
        }
        entries.push(ManifestEntry {
            path: full,
            label,
            class: class_col.and_then(field).map(str::to_string),
            group: group_col.and_then(field).map(str::to_string),
        });
    }
    let manifest = DatasetManifest::new(entries)?;
    for (label, n) in manifest.label_counts() {
        log::info!("manifest {}: {n} {label}", path.display());
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, text: &str) -> PathBuf {
        let p = dir.join("m.csv");
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn two_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "path,label\na.pgm,authentic\nb.pgm,tampered\n");
        let m = ingest_manifest(&p).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.entries()[0].path, dir.path().join("a.pgm"));
        assert_eq!(m.entries()[1].label, Label::Tampered);
        assert!(m.is_balanced());
    }

    #[test]
    fn optional_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "path,label,class,group\na.pgm,authentic,animal,g1\nb.pgm,tampered,,g1\n",
        );
        let m = ingest_manifest(&p).unwrap();
        assert_eq!(m.entries()[0].class.as_deref(), Some("animal"));
        assert_eq!(m.entries()[1].class, None);
        assert_eq!(m.entries()[1].group.as_deref(), Some("g1"));
    }

    #[test]
    fn rejections() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "path,label\na.pgm,authentic\na.pgm,tampered\n");
        match ingest_manifest(&p) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("duplicate"));
            }
            other => panic!("{other:?}"),
        }
        let p = write(dir.path(), "path,label\na.pgm,forged\n");
        assert!(matches!(
            ingest_manifest(&p),
            Err(Error::Parse { line: 2, .. })
        ));
        let p = write(dir.path(), "file,label\na.pgm,authentic\n");
        assert!(ingest_manifest(&p).is_err());
        assert!(matches!(
            ingest_manifest(&dir.path().join("missing.csv")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn balanced_casia_style_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut text = String::from("path,label\n");
        for i in 0..1000 {
            text.push_str(&format!("Au/{i}.tif,authentic\nTp/{i}.tif,tampered\n"));
        }
        let m = ingest_manifest(&write(dir.path(), &text)).unwrap();
        assert_eq!(m.len(), 2000);
        assert!(m.is_balanced());
        assert_eq!(m.label_counts()[&Label::Authentic], 1000);
    }

    #[test]
    fn write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let m = DatasetManifest::new(vec![
            ManifestEntry {
                path: dir.path().join("x.pgm"),
                label: Label::Authentic,
                class: None,
                group: Some("7".into()),
            },
            ManifestEntry {
                path: dir.path().join("y.pgm"),
                label: Label::Tampered,
                class: None,
                group: None,
            },
        ])
        .unwrap();
        let p = dir.path().join("out.csv");
        m.write(&p).unwrap();
        assert_eq!(
            fs::read_to_string(&p).unwrap(),
            "path,label,group\nx.pgm,authentic,7\ny.pgm,tampered,\n"
        );
        assert_eq!(ingest_manifest(&p).unwrap(), m);
    }
}
