use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::Exact;

use super::report::{exact_accuracy, format_decimal, privacy_index, read_raw_report, Task};

pub const TRADEOFF_HEADER: [&str; 4] = [
    "s",
    "forensics_accuracy",
    "recognizability_accuracy",
    "privacy_index",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TradeoffRow {
    pub s: u8,
    pub forensics_accuracy: Option<Exact>,
    pub recognizability_accuracy: Option<Exact>,
    pub privacy_index: Option<Exact>,
}

fn collect(path: &Path, tasks: &[Task]) -> Result<BTreeMap<u8, Exact>> {
    let mut best: BTreeMap<u8, (usize, Exact)> = BTreeMap::new();
    let mut seen = BTreeMap::new();
    for row in read_raw_report(path)? {
        let Some(rank) = tasks.iter().position(|&t| t == row.task) else {
            continue;
        };
        if let Some(prev) = seen.insert((row.s, row.task), row.line) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: row.line,
                message: format!(
                    "duplicate {} row for s={} (first on line {prev})",
                    row.task, row.s
                ),
            });
        }
        let acc = exact_accuracy(path, &row)?;
        match best.get(&row.s) {
            Some(&(r, _)) if r <= rank => {}
            _ => {
                best.insert(row.s, (rank, acc));
            }
        }
    }
    Ok(best.into_iter().map(|(s, (_, a))| (s, a)).collect())
}

/// Joins forensics and recognizability reports on `s`. Zeroed forensics rows
/// take precedence over raw ones. Without a recognizability report the
/// recognizability and privacy columns stay empty.
pub fn tradeoff_report(
    forensics: &Path,
    recognizability: Option<&Path>,
) -> Result<Vec<TradeoffRow>> {
    let fore = collect(forensics, &[Task::ForensicsZeroed, Task::ForensicsRaw])?;
    let recog = match recognizability {
        Some(p) => collect(p, &[Task::Recognizability])?,
        None => BTreeMap::new(),
    };
    let mut grid: Vec<u8> = fore.keys().chain(recog.keys()).copied().collect();
    grid.sort_unstable();
    grid.dedup();
    grid.into_iter()
        .map(|s| {
            let r = recog.get(&s).copied();
            Ok(TradeoffRow {
                s,
                forensics_accuracy: fore.get(&s).copied(),
                recognizability_accuracy: r,
                privacy_index: r.map(privacy_index).transpose()?,
            })
        })
        .collect()
}

pub fn tradeoff_to_string(rows: &[TradeoffRow]) -> String {
    let cell = |v: Option<Exact>| v.map(format_decimal).unwrap_or_default();
    let mut out = TRADEOFF_HEADER.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.s,
            cell(r.forensics_accuracy),
            cell(r.recognizability_accuracy),
            cell(r.privacy_index)
        ));
    }
    out
}

pub fn write_tradeoff(path: &Path, rows: &[TradeoffRow]) -> Result<()> {
    let text = tradeoff_to_string(rows);
    write_atomic(path, |w| w.write_all(text.as_bytes()))
}
