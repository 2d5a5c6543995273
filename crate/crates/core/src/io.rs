//! JSON formats for channels, circuits and error reports.
//!
//! A matrix is `{"re": [[..], ..], "im": [[..], ..]}` with rows listed in
//! order; `im` may be omitted for real matrices. A channel file holds one of
//! `{"kraus": [matrix, ..]}`, `{"choi": matrix}` or a family spec
//! `{"family": .., "dim": .., "params": {..}, "seed": ..}`, optionally with
//! a `"target"` unitary. A circuit file is `{"channels": [channel, ..],
//! "targets": [matrix, ..]}` with `targets` optional.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channel::{from_choi, validate_cptp, ChoiMatrix, KrausChannel};
use crate::error::{Error, Result};
use crate::genlib::{make_channel, FamilySpec};
use crate::matcore::{c, ComplexMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&crate::C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        Self { re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let n = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        if n == 0 || cols == 0 || self.re.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("matrix rows must be non-empty and of equal length".into()));
        }
        if !self.im.is_empty() && (self.im.len() != n || self.im.iter().any(|r| r.len() != cols)) {
            return Err(Error::Parse("re and im parts differ in shape".into()));
        }
        let mut m = ComplexMatrix::zeros(n, cols);
        for i in 0..n {
            for j in 0..cols {
                let im = if self.im.is_empty() { 0.0 } else { self.im[i][j] };
                m[(i, j)] = c(self.re[i][j], im);
            }
        }
        if !crate::matcore::all_finite(&m) {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrausJson {
    pub kraus: Vec<MatrixJson>,
}

impl KrausJson {
    pub fn from_channel(ch: &KrausChannel) -> Self {
        Self { kraus: ch.kraus.iter().map(MatrixJson::from_matrix).collect() }
    }
}

/// A parsed channel with its optional target.
#[derive(Debug, Clone)]
pub struct ChannelInput {
    pub channel: KrausChannel,
    pub target: Option<ComplexMatrix>,
}

fn field<T: for<'de> Deserialize<'de>>(v: &Value, key: &str) -> Result<T> {
    serde_json::from_value(v[key].clone()).map_err(|e| Error::Parse(format!("{key}: {e}")))
}

/// Channel from an already parsed JSON value. CPTP violations surface as
/// `NotCP` / `NotTP`, malformed input as `Parse`.
pub fn channel_from_value(v: &Value) -> Result<ChannelInput> {
    let obj = v.as_object().ok_or_else(|| Error::Parse("channel must be a JSON object".into()))?;
    let channel = if obj.contains_key("family") {
        let spec: FamilySpec = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        make_channel(&spec)?
    } else if obj.contains_key("kraus") {
        let ms: Vec<MatrixJson> = field(v, "kraus")?;
        let ks = ms.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?;
        if ks.iter().any(|k| k.nrows() != k.ncols()) {
            return Err(Error::Parse("Kraus operators must be square".into()));
        }
        let ch = KrausChannel::new(ks).map_err(|e| match e {
            Error::DimensionMismatch(s) => Error::Parse(s),
            e => e,
        })?;
        let rep = validate_cptp(&ch);
        if !rep.ok {
            return Err(Error::NotTP(rep.tp_slack));
        }
        ch
    } else if obj.contains_key("choi") {
        let m: MatrixJson = field(v, "choi")?;
        let m = m.to_matrix()?;
        let d = (m.nrows() as f64).sqrt().round() as usize;
        if d * d != m.nrows() || m.nrows() != m.ncols() {
            return Err(Error::Parse("Choi matrix must be d^2 x d^2".into()));
        }
        from_choi(&ChoiMatrix { dim: d, matrix: m })?.to_channel()
    } else {
        return Err(Error::Parse("expected one of \"kraus\", \"choi\" or \"family\"".into()));
    };
    let target = match obj.get("target") {
        Some(t) if !t.is_null() => Some(field::<MatrixJson>(v, "target")?.to_matrix()?),
        _ => None,
    };
    Ok(ChannelInput { channel, target })
}

pub fn parse_channel(text: &str) -> Result<ChannelInput> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    channel_from_value(&v)
}

/// Channels in application order and their targets.
pub fn parse_circuit(text: &str) -> Result<(Vec<KrausChannel>, Option<Vec<ComplexMatrix>>)> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let chans = v
        .get("channels")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("expected a \"channels\" array".into()))?;
    let channels = chans.iter().map(|c| channel_from_value(c).map(|i| i.channel)).collect::<Result<Vec<_>>>()?;
    let targets = match v.get("targets") {
        Some(t) if !t.is_null() => {
            let ms: Vec<MatrixJson> = field(&v, "targets")?;
            Some(ms.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?)
        }
        _ => None,
    };
    Ok((channels, targets))
}

/// Machine-readable error written to stderr by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorJson {
    pub error: String,
    pub message: String,
    pub exit_code: i32,
}

impl ErrorJson {
    pub fn new(e: &Error, exit_code: i32) -> Self {
        let kind = format!("{e:?}");
        let kind = kind.split(['(', ' ']).next().unwrap_or("Error").to_string();
        Self { error: kind, message: e.to_string(), exit_code }
    }
}
