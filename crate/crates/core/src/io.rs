//! JSON documents read and written by the command-line driver.
//!
//! Complex numbers are `[re, im]` (a bare number is accepted as real),
//! matrices are row-major nested arrays. Every emitted document carries
//! `"schema_version"`.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::flows::{ConservationReport, DeformationPath};
use crate::linalg::{ComplexMatrix, C64};
use crate::monodromy::StokesResult;
use crate::pairs::Pair;
use crate::poisson_so::{DeformationPoint, SkewSystem};
use crate::reflection::StokesMatrix;
use crate::stokes_bracket::{BracketTable, BraidWord};

pub const SCHEMA_VERSION: u64 = 1;

/// Largest matrix size accepted from input.
pub const MAX_DIMENSION: usize = 16;

/// Longest braid word accepted from input.
pub const MAX_BRAID_LENGTH: usize = 10_000;

pub fn complex_to_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn complex_from_json(v: &Value, what: &str) -> Result<C64> {
    let z = match v {
        Value::Number(x) => C64::new(number(x, what)?, 0.0),
        Value::Array(parts) if parts.len() == 2 => match (&parts[0], &parts[1]) {
            (Value::Number(a), Value::Number(b)) => C64::new(number(a, what)?, number(b, what)?),
            _ => return Err(Error::Invalid(format!("{what}: complex parts must be numbers"))),
        },
        _ => return Err(Error::Invalid(format!("{what}: expected a number or [re, im]"))),
    };
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Invalid(format!("{what}: non-finite value")));
    }
    Ok(z)
}

fn number(x: &serde_json::Number, what: &str) -> Result<f64> {
    x.as_f64().ok_or_else(|| Error::Invalid(format!("{what}: number out of range")))
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    Value::Array(m.to_rows().into_iter().map(|row| Value::Array(row.into_iter().map(complex_to_json).collect())).collect())
}

/// Square matrix of size at most [`MAX_DIMENSION`].
pub fn matrix_from_json(v: &Value, what: &str) -> Result<ComplexMatrix> {
    let rows = v.as_array().ok_or_else(|| Error::Invalid(format!("{what}: expected an array of rows")))?;
    let n = rows.len();
    if n == 0 || n > MAX_DIMENSION {
        return Err(Error::Dimension(format!("{what}: size {n} outside 1..={MAX_DIMENSION}")));
    }
    let mut out = Vec::with_capacity(n);
    for (r, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| Error::Invalid(format!("{what}: row {} is not an array", r + 1)))?;
        if row.len() != n {
            return Err(Error::Dimension(format!("{what}: row {} has {} entries, expected {n}", r + 1, row.len())));
        }
        out.push(
            row.iter()
                .enumerate()
                .map(|(c, x)| complex_from_json(x, &format!("{what}[{}][{}]", r + 1, c + 1)))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    ComplexMatrix::from_rows(&out)
}

pub fn vector_from_json(v: &Value, what: &str) -> Result<Vec<C64>> {
    let items = v.as_array().ok_or_else(|| Error::Invalid(format!("{what}: expected an array")))?;
    if items.is_empty() || items.len() > MAX_DIMENSION {
        return Err(Error::Dimension(format!("{what}: length {} outside 1..={MAX_DIMENSION}", items.len())));
    }
    items.iter().enumerate().map(|(k, x)| complex_from_json(x, &format!("{what}[{}]", k + 1))).collect()
}

fn parse_object(text: &str) -> Result<Map<String, Value>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("malformed JSON: {e}")))?;
    let obj = match v {
        Value::Object(o) => o,
        _ => return Err(Error::Invalid("expected a JSON object".into())),
    };
    if let Some(ver) = obj.get("schema_version") {
        if ver.as_u64() != Some(SCHEMA_VERSION) {
            return Err(Error::Invalid(format!("unsupported schema_version {ver}")));
        }
    }
    Ok(obj)
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::Invalid(format!("missing field \"{key}\"")))
}

/// `{"s": [[...]]}` with an exactly unitriangular matrix.
pub fn parse_stokes_document(text: &str) -> Result<StokesMatrix> {
    let obj = parse_object(text)?;
    StokesMatrix::from_matrix(&matrix_from_json(field(&obj, "s")?, "s")?)
}

/// Residue matrix together with the position data it is evaluated at.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewInput {
    pub v: SkewSystem,
    pub u: DeformationPoint,
}

/// `{"v": [[...]], "u": [...], "psi": number?}`; without `psi` the angle
/// maximising the admissibility margin is used.
pub fn parse_skew_document(text: &str) -> Result<SkewInput> {
    let obj = parse_object(text)?;
    let v = SkewSystem::from_matrix(&matrix_from_json(field(&obj, "v")?, "v")?, 0.0)?;
    let u = point_from(&obj, v.n())?;
    Ok(SkewInput { v, u })
}

fn psi_from(obj: &Map<String, Value>) -> Result<Option<f64>> {
    match obj.get("psi") {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Number(x)) => {
            let psi = number(x, "psi")?;
            if !psi.is_finite() {
                return Err(Error::Invalid("psi must be finite".into()));
            }
            Ok(Some(psi))
        }
        Some(_) => Err(Error::Invalid("psi must be a number".into())),
    }
}

fn point_from(obj: &Map<String, Value>, n: usize) -> Result<DeformationPoint> {
    let u = vector_from_json(field(obj, "u")?, "u")?;
    if u.len() != n {
        return Err(Error::Dimension(format!("u has {} entries but V is {n}×{n}", u.len())));
    }
    match psi_from(obj)? {
        Some(psi) => DeformationPoint::new(u, psi),
        None => DeformationPoint::with_best_angle(u),
    }
}

/// Braid word as a JSON array of signed 1-based generators, or as text:
/// integers separated by whitespace or commas (`"1 -2 3"`).
pub fn parse_braid_word(text: &str) -> Result<BraidWord> {
    let trimmed = text.trim();
    let gens: Vec<i64> = if trimmed.starts_with('[') {
        let v: Value = serde_json::from_str(trimmed).map_err(|e| Error::Invalid(format!("malformed braid word: {e}")))?;
        braid_array(&v)?
    } else {
        trimmed
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<i64>().map_err(|_| Error::Invalid(format!("braid letter {t:?} is not an integer"))))
            .collect::<Result<_>>()?
    };
    if gens.len() > MAX_BRAID_LENGTH {
        return Err(Error::Invalid(format!("braid word longer than {MAX_BRAID_LENGTH} letters")));
    }
    BraidWord::from_signed(&gens)
}

fn braid_array(v: &Value) -> Result<Vec<i64>> {
    let items = v.as_array().ok_or_else(|| Error::Invalid("braid word must be an array".into()))?;
    if items.len() > MAX_BRAID_LENGTH {
        return Err(Error::Invalid(format!("braid word longer than {MAX_BRAID_LENGTH} letters")));
    }
    items
        .iter()
        .map(|x| x.as_i64().ok_or_else(|| Error::Invalid(format!("braid letter {x} is not an integer"))))
        .collect()
}

/// `{"s": [[...]], "word": [1, -2, ...]}`.
pub fn parse_braid_document(text: &str) -> Result<(StokesMatrix, BraidWord)> {
    let obj = parse_object(text)?;
    let s = StokesMatrix::from_matrix(&matrix_from_json(field(&obj, "s")?, "s")?)?;
    let gens = braid_array(field(&obj, "word")?)?;
    let w = BraidWord::from_signed(&gens)?;
    w.check(s.n())?;
    Ok((s, w))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowInput {
    pub v: SkewSystem,
    pub path: DeformationPath,
}

/// `{"v": [[...]], "u": [...], "psi": number?, "waypoints": [[...], ...]}`;
/// the path runs from `u` through each waypoint.
pub fn parse_flow_document(text: &str) -> Result<FlowInput> {
    let obj = parse_object(text)?;
    let v = SkewSystem::from_matrix(&matrix_from_json(field(&obj, "v")?, "v")?, 0.0)?;
    let start = point_from(&obj, v.n())?;
    let wps = field(&obj, "waypoints")?.as_array().ok_or_else(|| Error::Invalid("waypoints must be an array".into()))?;
    if wps.is_empty() || wps.len() > 64 {
        return Err(Error::Invalid("waypoints must hold between 1 and 64 points".into()));
    }
    let mut points = vec![start.clone()];
    for (k, w) in wps.iter().enumerate() {
        let u = vector_from_json(w, &format!("waypoints[{}]", k + 1))?;
        if u.len() != v.n() {
            return Err(Error::Dimension(format!("waypoint {} has {} entries, expected {}", k + 1, u.len(), v.n())));
        }
        points.push(DeformationPoint::new(u, start.psi())?);
    }
    Ok(FlowInput { v, path: DeformationPath::new(points)? })
}

/// Adds `"schema_version"` to an object.
pub fn versioned(mut doc: Value) -> Value {
    if let Value::Object(ref mut m) = doc {
        m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    }
    doc
}

pub fn stokes_matrix_to_json(s: &StokesMatrix) -> Value {
    matrix_to_json(&s.matrix())
}

pub fn stokes_result_to_json(r: &StokesResult) -> Value {
    versioned(json!({
        "s": stokes_matrix_to_json(&r.s),
        "permutation": r.permutation.iter().map(|k| k + 1).collect::<Vec<_>>(),
        "ordering": r.ordering.as_str(),
        "diagnostics": {
            "s_minus_residual": r.s_minus_residual,
            "triangularity_residual": r.triangularity_residual,
            "diagonal_residual": r.diagonal_residual,
            "spectral_residual": r.spectral_residual,
        },
        "matching_radius": r.matching_radius,
        "inner_radius": r.inner_radius,
    }))
}

pub fn bracket_table_to_json(t: &BracketTable, kappa: C64) -> Value {
    let entries: Vec<Value> = Pair::all(t.n())
        .flat_map(|p| Pair::all(t.n()).filter(move |q| p < *q).map(move |q| (p, q)))
        .map(|(p, q)| {
            json!({
                "p": [p.i + 1, p.j + 1],
                "q": [q.i + 1, q.j + 1],
                "value": complex_to_json(t.get(p, q)),
            })
        })
        .collect();
    versioned(json!({ "n": t.n(), "kappa": complex_to_json(kappa), "entries": entries }))
}

pub fn conservation_report_to_json(r: &ConservationReport) -> Value {
    let cs = |v: &[C64]| v.iter().map(|z| complex_to_json(*z)).collect::<Vec<_>>();
    versioned(json!({
        "stokes_drift": r.stokes_drift,
        "eigen_drift": r.eigen_drift,
        "stokes_start": cs(&r.stokes_start),
        "stokes_end": cs(&r.stokes_end),
        "hamiltonians_start": cs(&r.hamiltonians_start),
        "hamiltonians_end": cs(&r.hamiltonians_end),
        "v_end": matrix_to_json(&r.v_end.matrix()),
    }))
}
