use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use num_traits::{Num, One, Zero};

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::Exact;

pub const REPORT_HEADER: [&str; 6] = ["s", "task", "accuracy", "n_train", "n_test", "seed"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Task {
    ForensicsRaw,
    ForensicsZeroed,
    Recognizability,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::ForensicsRaw => "forensics_raw",
            Task::ForensicsZeroed => "forensics_zeroed",
            Task::Recognizability => "recognizability",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "forensics_raw" => Ok(Task::ForensicsRaw),
            "forensics_zeroed" => Ok(Task::ForensicsZeroed),
            "recognizability" => Ok(Task::Recognizability),
            other => Err(Error::InvalidInput(format!("unknown task `{other}`"))),
        }
    }
}

/// One line of a report CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub s: u8,
    pub task: Task,
    pub accuracy: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
}

impl ReportRow {
    pub fn privacy_index(&self) -> Result<f64> {
        privacy_index(self.accuracy)
    }

    fn record(&self) -> [String; 6] {
        [
            self.s.to_string(),
            self.task.to_string(),
            self.accuracy.to_string(),
            self.n_train.to_string(),
            self.n_test.to_string(),
            self.seed.to_string(),
        ]
    }
}

/// `1 - accuracy`, defined for accuracies in `[0, 1]`.
pub fn privacy_index<T: Num + PartialOrd + Copy>(accuracy: T) -> Result<T> {
    let in_range = accuracy >= T::zero() && accuracy <= T::one();
    if !in_range {
        return Err(Error::InvalidInput("accuracy must lie in [0, 1]".into()));
    }
    Ok(T::one() - accuracy)
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

fn encode(rows: &[ReportRow], header: bool) -> Vec<u8> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        if header {
            w.write_record(REPORT_HEADER).expect("in-memory write");
        }
        for r in rows {
            w.write_record(r.record()).expect("in-memory write");
        }
        w.flush().expect("in-memory write");
    }
    buf
}

/// Writes a fresh report. An existing file is an error unless `force`.
pub fn write_report(path: &Path, rows: &[ReportRow], force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(Error::InvalidArgument(format!(
            "{} already exists; pass --force to overwrite",
            path.display()
        )));
    }
    let bytes = encode(rows, true);
    write_atomic(path, |w| w.write_all(&bytes))
}

/// Appends rows, writing the header first when the file is new or empty.
pub fn append_report(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let bytes = encode(rows, fresh);
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

/// Report line with the accuracy kept as written.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct RawReportRow {
    pub line: usize,
    pub s: u8,
    pub task: Task,
    pub accuracy: String,
}

/// Reads the `s`, `task` and `accuracy` columns of a report. Other columns
/// are ignored, so partial reports from other tools are accepted.
pub(crate) fn read_raw_report(path: &Path) -> Result<Vec<RawReportRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(1, format!("missing `{name}` column")))
    };
    let (sc, tc, ac) = (col("s")?, col("task")?, col("accuracy")?);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let get = |c: usize| record.get(c).unwrap_or("");
        let s: u8 = get(sc)
            .parse()
            .ok()
            .filter(|&s| s <= 8)
            .ok_or_else(|| parse_err(line, format!("bad plane count `{}`", get(sc))))?;
        let task: Task = get(tc)
            .parse()
            .map_err(|e: Error| parse_err(line, e.to_string()))?;
        rows.push(RawReportRow {
            line,
            s,
            task,
            accuracy: get(ac).to_string(),
        });
    }
    Ok(rows)
}

/// Reads a report CSV in full.
pub fn read_report(path: &Path) -> Result<Vec<ReportRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| csv_err(path, e))?;
    if headers.iter().ne(REPORT_HEADER) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header {}", REPORT_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let bad = |what: &str| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("bad {what}"),
        };
        let accuracy: f64 = record[2].parse().map_err(|_| bad("accuracy"))?;
        if !(0.0..=1.0).contains(&accuracy) {
            return Err(bad("accuracy"));
        }
        rows.push(ReportRow {
            s: record[0]
                .parse()
                .ok()
                .filter(|&s| s <= 8)
                .ok_or_else(|| bad("s"))?,
            task: record[1].parse().map_err(|_| bad("task"))?,
            accuracy,
            n_train: record[3].parse().map_err(|_| bad("n_train"))?,
            n_test: record[4].parse().map_err(|_| bad("n_test"))?,
            seed: record[5].parse().map_err(|_| bad("seed"))?,
        });
    }
    Ok(rows)
}

/// Parses a plain or exponent decimal (`0.81`, `-2`, `1.5e-3`) exactly.
pub fn parse_decimal(text: &str) -> Option<Exact> {
    let text = text.trim();
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(k) => (&text[..k], text[k + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int}{frac}");
    let mut value = Exact::from_integer(if all.is_empty() { 0 } else { all.parse().ok()? });
    let scale = exp.checked_sub(frac.len() as i32)?;
    let ten = Exact::from_integer(10);
    let factor = num_traits::checked_pow(ten, scale.unsigned_abs() as usize)?;
    value = if scale >= 0 {
        value * factor
    } else {
        value / factor
    };
    Some(if neg { -value } else { value })
}

/// Shortest exact decimal for terminating fractions; otherwise 17
/// significant digits.
pub fn format_decimal(value: Exact) -> String {
    let mut d = *value.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        let f = *value.numer() as f64 / *value.denom() as f64;
        return format!("{}", format!("{f:.17e}").parse::<f64>().unwrap_or(f));
    }
    let places = twos.max(fives);
    let scaled = value * Exact::from_integer(10i128.pow(places));
    let n = scaled.to_integer();
    let neg = n < 0;
    let digits = n.unsigned_abs().to_string();
    let places = places as usize;
    let (int, frac) = if digits.len() > places {
        digits.split_at(digits.len() - places)
    } else {
        ("0", digits.as_str())
    };
    let frac = format!("{frac:0>places$}");
    let frac = frac.trim_end_matches('0');
    let sign = if neg { "-" } else { "" };
    if frac.is_empty() {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

pub(crate) fn exact_accuracy(path: &Path, row: &RawReportRow) -> Result<Exact> {
    let value = parse_decimal(&row.accuracy).ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: row.line,
        message: format!("accuracy `{}` is not a decimal number", row.accuracy),
    })?;
    if value < Exact::zero() || value > Exact::one() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: row.line,
            message: format!("accuracy {} outside [0, 1]", row.accuracy),
        });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(s: u8, acc: f64) -> ReportRow {
        ReportRow {
            s,
            task: Task::ForensicsZeroed,
            accuracy: acc,
            n_train: 320,
            n_test: 80,
            seed: 1,
        }
    }

    #[test]
    fn privacy_index_exact_and_float() {
        let a = parse_decimal("0.29").unwrap();
        assert_eq!(privacy_index(a).unwrap(), parse_decimal("0.71").unwrap());
        assert_eq!(privacy_index(0.25f64).unwrap(), 0.75);
        assert!(privacy_index(1.5f64).is_err());
        assert!(privacy_index(-0.1f64).is_err());
        assert!(privacy_index(f64::NAN).is_err());
    }

    #[test]
    fn decimals() {
        for (text, out) in [
            ("0.81", "0.81"),
            ("1", "1"),
            ("0.500", "0.5"),
            ("-2.25", "-2.25"),
            ("1.5e-3", "0.0015"),
            (".5", "0.5"),
            ("0", "0"),
            ("2e2", "200"),
        ] {
            assert_eq!(format_decimal(parse_decimal(text).unwrap()), out, "{text}");
        }
        for bad in ["", "abc", "1.2.3", "--1", "1e", "."] {
            assert!(parse_decimal(bad).is_none(), "{bad}");
        }
        assert_eq!(parse_decimal("0.1").unwrap(), Exact::new(1, 10));
        assert_eq!(format_decimal(Exact::new(1, 3)), "0.3333333333333333");
    }

    #[test]
    fn write_read_append() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_report(&p, &[row(0, 0.9)], false).unwrap();
        assert!(write_report(&p, &[row(1, 0.8)], false).is_err());
        append_report(&p, &[row(1, 0.8125)]).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text, "s,task,accuracy,n_train,n_test,seed\n0,forensics_zeroed,0.9,320,80,1\n1,forensics_zeroed,0.8125,320,80,1\n");
        assert_eq!(read_report(&p).unwrap(), vec![row(0, 0.9), row(1, 0.8125)]);
        write_report(&p, &[row(2, 0.5)], true).unwrap();
        assert_eq!(read_report(&p).unwrap().len(), 1);
        let q = dir.path().join("new.csv");
        append_report(&q, &[row(3, 0.5)]).unwrap();
        assert!(fs::read_to_string(&q).unwrap().starts_with("s,task"));
    }

    #[test]
    fn malformed_report_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        fs::write(&p, "s,task,accuracy,n_train,n_test,seed\n0,forensics_raw,0.5,1,1,1\n1,forensics_raw,x,1,1,1\n").unwrap();
        assert!(matches!(read_report(&p), Err(Error::Parse { line: 3, .. })));
        fs::write(&p, "s,task,accuracy\n9,forensics_raw,0.5\n").unwrap();
        assert!(matches!(
            read_raw_report(&p),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
