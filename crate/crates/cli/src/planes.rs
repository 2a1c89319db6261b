use crate::commands::UsageError;

/// Parses `a..b` / `a..=b` (both inclusive), `a,b,c`, or `a`.
pub fn parse_plane_range(text: &str) -> Result<Vec<u8>, UsageError> {
    let bad = || UsageError(format!("invalid --s-range `{text}`"));
    let one = |t: &str| -> Result<u8, UsageError> {
        t.trim()
            .parse::<u8>()
            .ok()
            .filter(|&s| s <= 8)
            .ok_or_else(bad)
    };
    let planes = if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (one(a)?, one(b.trim_start_matches('='))?);
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        text.split(',').map(one).collect::<Result<Vec<_>, _>>()?
    };
    let mut seen = [false; 9];
    for &s in &planes {
        if std::mem::replace(&mut seen[s as usize], true) {
            return Err(UsageError(format!("--s-range repeats {s}")));
        }
    }
    Ok(planes)
}
