use std::f64::consts::PI;
use std::ops::RangeInclusive;

use slzero::{parse_potential, Potential};

/// Angle in radians: a plain number or a multiple of `pi` such as `pi`,
/// `pi/2`, `3pi/4`, `3*pi/4` or `-pi/3`.
pub fn angle(s: &str) -> Result<f64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    if !t.contains("pi") {
        return t.parse::<f64>().map_err(|_| format!("cannot read angle `{s}`"));
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().map_err(|_| format!("cannot read denominator in `{s}`"))?),
        None => (t.as_str(), 1.0),
    };
    let coef = num.strip_suffix("pi").ok_or_else(|| format!("`pi` must end the numerator in `{s}`"))?;
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let c = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| format!("cannot read coefficient in `{s}`"))?,
    };
    if den == 0.0 {
        return Err(format!("zero denominator in `{s}`"));
    }
    // keep PI itself bit-exact so pinned endpoints are recognised
    Ok(if c == 1.0 && den == 1.0 { PI } else { c * PI / den })
}

/// Inclusive index range `a..b`, `a..=b` or a single index.
pub fn index_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let bad = || format!("cannot read index range `{s}` (expected e.g. 0..3)");
    match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            Ok(a..=b)
        }
        None => {
            let n: usize = s.trim().parse().map_err(|_| bad())?;
            Ok(n..=n)
        }
    }
}

/// Potential from a JSON document, `@path` to a JSON file, or shorthand
/// `kind[:p1,p2,...]` (`zero`, `constant:5`, `cosine:1,2`, `step:10,1,2`,
/// `power:1,-0.5`).
pub fn potential(s: &str) -> Result<Potential, slzero::Error> {
    let s = s.trim();
    if let Some(path) = s.strip_prefix('@') {
        let doc = std::fs::read_to_string(path)
            .map_err(|e| slzero::Error::InvalidParameter(format!("cannot read {path}: {e}")))?;
        return parse_potential(&doc);
    }
    if s.starts_with('{') {
        return parse_potential(s);
    }
    let (kind, params) = s.split_once(':').unwrap_or((s, ""));
    let nums: Vec<f64> = if params.is_empty() {
        Vec::new()
    } else {
        params
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| slzero::Error::Parse(format!("non-numeric parameter in `{s}`")))?
    };
    let names: &[&str] = match kind {
        "zero" => &[],
        "constant" => &["c"],
        "cosine" => &["a", "f"],
        "step" => &["v", "l", "r"],
        "power" => &["a", "p"],
        "table" => return Err(slzero::Error::Parse("tables need the JSON form".into())),
        other => return Err(slzero::Error::UnknownKind(other.into())),
    };
    if nums.len() != names.len() {
        return Err(slzero::Error::Parse(format!("`{kind}` takes {} parameter(s): {}", names.len(), names.join(","))));
    }
    let mut doc = serde_json::Map::new();
    doc.insert("kind".into(), kind.into());
    for (n, v) in names.iter().zip(nums) {
        doc.insert((*n).into(), v.into());
    }
    parse_potential(&serde_json::Value::Object(doc).to_string())
}
