//! Plain-text model files.
//!
//! ```text
//! dim 3
//! lambda 1.0000000000000000e0
//! label_offset 0.0000000000000000e0
//! means
//! <dim lines>
//! stds
//! <dim lines>
//! weights
//! <dim lines>
//! ```
//! Floats carry 17 significant digits so `f64` values round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::scalar::Real;

use super::ridge::RidgeModel;

fn fmt_real<T: Real>(out: &mut String, v: T) {
    let _ = writeln!(out, "{:.16e}", v);
}

pub fn model_to_string<T: Real>(model: &RidgeModel<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dim {}", model.dim());
    out.push_str("lambda ");
    fmt_real(&mut out, model.lambda());
    out.push_str("label_offset ");
    fmt_real(&mut out, model.label_offset());
    for (name, values) in [
        ("means", model.means()),
        ("stds", model.stds()),
        ("weights", model.weights()),
    ] {
        let _ = writeln!(out, "{name}");
        for &v in values {
            fmt_real(&mut out, v);
        }
    }
    out
}

pub fn parse_model<T: Real>(text: &str, path: &Path) -> Result<RidgeModel<T>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| err(0, format!("unexpected end of file, expected {what}")))
    };
    let parse_real = |line: usize, s: &str| -> Result<T> {
        s.parse::<T>()
            .map_err(|_| err(line, format!("invalid number {s:?}")))
    };
    let mut keyed = |key: &str| -> Result<(usize, String)> {
        let (line, text) = next(key)?;
        let mut parts = text.split_whitespace();
        if parts.next() != Some(key) {
            return Err(err(line, format!("expected `{key} <value>`")));
        }
        let value = parts
            .next()
            .ok_or_else(|| err(line, format!("missing value for {key}")))?;
        Ok((line, value.to_string()))
    };
    let (line, dim) = keyed("dim")?;
    let dim: usize = dim
        .parse()
        .map_err(|_| err(line, format!("invalid dimension {dim:?}")))?;
    let (line, lambda) = keyed("lambda")?;
    let lambda = parse_real(line, &lambda)?;
    let (line, offset) = keyed("label_offset")?;
    let label_offset = parse_real(line, &offset)?;

    let mut sections: Vec<Vec<T>> = Vec::new();
    for name in ["means", "stds", "weights"] {
        let (line, header) = next(name)?;
        if header != name {
            return Err(err(
                line,
                format!("expected section `{name}`, found {header:?}"),
            ));
        }
        let mut values = Vec::with_capacity(dim);
        for _ in 0..dim {
            let (line, v) = next("a value")?;
            values.push(parse_real(line, v)?);
        }
        sections.push(values);
    }
    if let Some((line, extra)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(err(line, format!("trailing content {extra:?}")));
    }
    let weights = sections.pop().unwrap();
    let stds = sections.pop().unwrap();
    let means = sections.pop().unwrap();
    RidgeModel::from_parts(weights, means, stds, label_offset, lambda)
        .map_err(|e| Error::format(path, e.to_string()))
}

pub fn save_model<T: Real>(path: &Path, model: &RidgeModel<T>) -> Result<()> {
    let text = model_to_string(model);
    write_atomic(path, |w| w.write_all(text.as_bytes()))
}

pub fn load_model<T: Real>(path: &Path) -> Result<RidgeModel<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout() {
        let m = RidgeModel::from_parts(vec![0.5, -2.0], vec![1.0, 0.1], vec![1.0, 3.0], 0.25, 1.0)
            .unwrap();
        let text = model_to_string(&m);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "dim 2");
        assert_eq!(lines[1], "lambda 1.0000000000000000e0");
        assert_eq!(lines[3], "means");
        assert_eq!(lines[6], "stds");
        assert_eq!(lines[9], "weights");
        assert_eq!(lines.len(), 12);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let p = Path::new("m.txt");
        let bad = "dim 1\nlambda 1\nlabel_offset 0\nmeans\nabc\nstds\n1\nweights\n1\n";
        match parse_model::<f64>(bad, p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        assert!(parse_model::<f64>("dim 1\n", p).is_err());
        let extra = "dim 1\nlambda 1\nlabel_offset 0\nmeans\n0\nstds\n1\nweights\n1\nmore\n";
        assert!(parse_model::<f64>(extra, p).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(
            w in proptest::collection::vec(-1e6f64..1e6, 1..8),
            offset in -1.0f64..1.0,
            lambda in 0.0f64..100.0,
        ) {
            let d = w.len();
            let means: Vec<f64> = w.iter().map(|x| x / 3.0).collect();
            let stds: Vec<f64> = w.iter().map(|x| x.abs() + 1e-3).collect();
            let m = RidgeModel::from_parts(w, means, stds, offset, lambda).unwrap();
            let back: RidgeModel<f64> = parse_model(&model_to_string(&m), Path::new("x")).unwrap();
            prop_assert_eq!(back.dim(), d);
            prop_assert_eq!(back, m);
        }
    }
}
