//! Output formatting shared by the report and CSV writers. Floats are
//! printed with 17 significant digits.

use std::io::Write;
use std::path::Path;

use serde::Serializer;
use serde_json::value::RawValue;

/// 17 significant digits; fixed notation for exponents in `[-5, 17)`,
/// scientific otherwise. Non-finite values print as `NaN`/`inf`/`-inf`.
pub fn fmt_sig17(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.16e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if (-5..17).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, v)
    } else {
        sci
    }
}

fn raw<S: Serializer>(text: String, s: S) -> Result<S::Ok, S::Error> {
    let raw = RawValue::from_string(text).map_err(serde::ser::Error::custom)?;
    serde::Serialize::serialize(&raw, s)
}

/// `serialize_with` helper: JSON number with 17 significant digits, `null`
/// when not finite. Only meaningful with `serde_json`.
pub fn sig17<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        raw(fmt_sig17(*v), s)
    } else {
        s.serialize_none()
    }
}

pub fn sig17_opt<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => sig17(v, s),
        None => s.serialize_none(),
    }
}

pub fn sig17_vec<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let items: Vec<String> = v
        .iter()
        .map(|v| if v.is_finite() { fmt_sig17(*v) } else { "null".into() })
        .collect();
    raw(format!("[{}]", items.join(",")), s)
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
