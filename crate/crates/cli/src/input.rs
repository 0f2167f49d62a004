//! Input documents: canonical JSON and the CSV convenience format.
//!
//! Numbers stay decimal strings until the working precision is known, so nothing is
//! rounded through `f64` on the way in.

use std::path::Path;

use decoy_core::model::{ChannelParams, ErrorModel, IntensitySet, MeasurementRecord};
use decoy_core::symfunc::PrecisionConfig;
use decoy_core::{Mp64, Real};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, CliResult};

/// A decimal literal as written in the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decimal(pub String);

impl Decimal {
    pub fn parse<T: Real>(&self, field: &str) -> CliResult<T> {
        T::parse_decimal(self.0.trim())
            .ok_or_else(|| CliError::Schema(format!("{field}: cannot read {:?} as a decimal number", self.0)))
    }

    fn is_valid(s: &str) -> bool {
        Mp64::parse_decimal(s.trim()).is_some()
    }
}

impl From<String> for Decimal {
    fn from(s: String) -> Self {
        Decimal(s)
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

// Accepts JSON numbers (kept verbatim thanks to `arbitrary_precision`) or strings.
impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let text = match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(D::Error::custom(format!("expected a decimal number or string, found {other}"))),
        };
        if Decimal::is_valid(&text) {
            Ok(Decimal(text))
        } else {
            Err(D::Error::custom(format!("{text:?} is not a decimal number")))
        }
    }
}

/// Channel description; every key is optional and only the combinations a mode needs are checked.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawModel {
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Decimal>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_det: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_dark: Option<Decimal>,
}

impl RawModel {
    fn is_empty(&self) -> bool {
        *self == RawModel::default()
    }
}

/// The canonical input document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInput {
    #[serde(alias = "mu")]
    pub intensities: Vec<Decimal>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Decimal>>,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Vec<Decimal>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<RawModel>,
    /// 1-based index of the signal intensity for the key rate; defaults to the largest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Decimal>,
    /// Generating yields `y_1, y_2, …` when the data were synthesized from a finite support.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yields: Option<Vec<Decimal>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Json,
    Csv,
}

impl InputFormat {
    /// `.csv` files are CSV; everything else, and stdin starting with `{`, is JSON.
    pub fn detect(path: Option<&Path>, text: &str) -> Self {
        match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            Some(_) => InputFormat::Json,
            None if text.trim_start().starts_with('{') => InputFormat::Json,
            None => InputFormat::Csv,
        }
    }
}

pub fn read_input(path: Option<&Path>) -> CliResult<RawInput> {
    let text = match path {
        Some(p) if p != Path::new("-") => std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?,
        _ => std::io::read_to_string(std::io::stdin()).map_err(|e| CliError::io("<stdin>", e))?,
    };
    let path = path.filter(|p| *p != Path::new("-"));
    parse_text(&text, InputFormat::detect(path, &text))
}

pub fn parse_text(text: &str, format: InputFormat) -> CliResult<RawInput> {
    match format {
        InputFormat::Json => parse_json(text),
        InputFormat::Csv => parse_csv(text),
    }
}

pub fn parse_json(text: &str) -> CliResult<RawInput> {
    serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
}

#[derive(Clone, Copy)]
enum Column {
    Mu,
    Q,
    E,
}

/// `key=value` sidecar lines (several per line allowed, comma separated) plus a
/// `mu,Q[,E]` table with an optional header row. `#` starts a comment line.
pub fn parse_csv(text: &str) -> CliResult<RawInput> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut input = RawInput::default();
    let mut model = RawModel::default();
    let mut columns: Option<Vec<Column>> = None;
    let mut q = Vec::new();
    let mut e = Vec::new();
    let mut e_rows = 0usize;
    let mut rows = 0usize;

    for record in reader.records() {
        let record = record.map_err(|err| CliError::Schema(format!("csv: {err}")))?;
        let line = record.position().map_or(0, |p| p.line());
        let fields: Vec<&str> = record.iter().filter(|f| !f.is_empty()).collect();
        if fields.is_empty() {
            continue;
        }
        if fields.iter().all(|f| f.contains('=')) {
            for field in fields {
                let (key, value) = field.split_once('=').expect("checked above");
                set_sidecar(&mut input, &mut model, key.trim(), value.trim(), line)?;
            }
            continue;
        }
        if columns.is_none() && !Decimal::is_valid(fields[0]) {
            columns = Some(header(&fields, line)?);
            continue;
        }
        let cols = columns.get_or_insert_with(|| vec![Column::Mu, Column::Q, Column::E]);
        let width = if cols.len() == 3 { 2..=3 } else { cols.len()..=cols.len() };
        if !width.contains(&fields.len()) {
            return Err(CliError::Schema(format!(
                "line {line}: expected {} fields, found {}",
                cols.len(),
                fields.len()
            )));
        }
        rows += 1;
        for (col, raw) in cols.iter().zip(&fields) {
            if !Decimal::is_valid(raw) {
                let name = match col {
                    Column::Mu => "mu",
                    Column::Q => "Q",
                    Column::E => "E",
                };
                return Err(CliError::Schema(format!("line {line}, field {name}: {raw:?} is not a decimal number")));
            }
            let d = Decimal(raw.to_string());
            match col {
                Column::Mu => input.intensities.push(d),
                Column::Q => q.push(d),
                Column::E => {
                    e.push(d);
                    e_rows += 1;
                }
            }
        }
    }
    if rows == 0 {
        return Err(CliError::Schema("csv: no data rows".into()));
    }
    if e_rows != 0 && e_rows != rows {
        return Err(CliError::Schema(format!("csv: E given on {e_rows} of {rows} rows")));
    }
    if q.len() == rows {
        input.q = Some(q);
    }
    if e_rows == rows {
        input.e = Some(e);
    }
    if !model.is_empty() {
        input.model = Some(model);
    }
    Ok(input)
}

fn header(fields: &[&str], line: u64) -> CliResult<Vec<Column>> {
    fields
        .iter()
        .map(|f| match f.to_ascii_lowercase().as_str() {
            "mu" | "μ" | "intensity" => Ok(Column::Mu),
            "q" => Ok(Column::Q),
            "e" => Ok(Column::E),
            other => Err(CliError::Schema(format!("line {line}: unknown column {other:?} (expected mu, Q, E)"))),
        })
        .collect::<CliResult<Vec<_>>>()
        .and_then(|cols| {
            if matches!(cols.first(), Some(Column::Mu)) {
                Ok(cols)
            } else {
                Err(CliError::Schema(format!("line {line}: the first column must be mu")))
            }
        })
}

fn set_sidecar(input: &mut RawInput, model: &mut RawModel, key: &str, value: &str, line: u64) -> CliResult<()> {
    let number = || {
        if Decimal::is_valid(value) {
            Ok(Decimal(value.to_string()))
        } else {
            Err(CliError::Schema(format!("line {line}, key {key}: {value:?} is not a decimal number")))
        }
    };
    match key {
        "y0" => input.y0 = Some(number()?),
        "A" => model.a = Some(number()?),
        "B" => model.b = Some(number()?),
        "eta" => model.eta = Some(number()?),
        "e_det" => model.e_det = Some(number()?),
        "p_dark" => model.p_dark = Some(number()?),
        "f" => input.f = Some(number()?),
        "signal" => {
            input.signal = Some(value.parse().map_err(|_| {
                CliError::Schema(format!("line {line}, key signal: {value:?} is not a positive integer"))
            })?)
        }
        other => return Err(CliError::Schema(format!("line {line}: unknown key {other:?}"))),
    }
    Ok(())
}

/// Error-product channel parameters together with the `(e_det, p_dark)` they came from.
pub type ErrorParams<T> = (ChannelParams<T>, ErrorModel<T>);

/// Yield-model and error-model parameters, each present only if the input determines it.
pub type ResolvedModel<T> = (Option<ChannelParams<T>>, Option<ErrorParams<T>>);

/// The input at working precision `T`, validated.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub set: IntensitySet<T>,
    pub q: Option<Vec<T>>,
    pub e: Option<Vec<T>>,
    pub yields_model: Option<ChannelParams<T>>,
    pub errors_model: Option<ErrorParams<T>>,
    pub signal: Option<usize>,
    pub f: Option<T>,
    pub warnings: Vec<String>,
}

impl<T: Real> Parsed<T> {
    pub fn record(&self) -> CliResult<MeasurementRecord<T>> {
        let q = self
            .q
            .clone()
            .ok_or_else(|| CliError::Validation("detection rates Q are required".into()))?;
        Ok(MeasurementRecord::new(&self.set, q, self.e.clone())?)
    }
}

fn list<T: Real>(name: &str, values: &[Decimal]) -> CliResult<Vec<T>> {
    values
        .iter()
        .enumerate()
        .map(|(i, d)| d.parse(&format!("{name}[{i}]")))
        .collect()
}

fn opt<T: Real>(name: &str, value: &Option<Decimal>) -> CliResult<Option<T>> {
    value.as_ref().map(|d| d.parse(name)).transpose()
}

/// Resolves `(A, B, eta)` and the optional `(e_det, p_dark)` error model.
///
/// `A` defaults to one and `B` to `p_dark`; the error model falls back to `B` for `p_dark`.
pub fn resolve_model<T: Real>(
    raw: &RawModel,
    allow_out_of_domain: bool,
    warnings: &mut Vec<String>,
) -> CliResult<ResolvedModel<T>> {
    let a: Option<T> = opt("model.A", &raw.a)?;
    let b: Option<T> = opt("model.B", &raw.b)?;
    let eta: Option<T> = opt("model.eta", &raw.eta)?;
    let e_det: Option<T> = opt("model.e_det", &raw.e_det)?;
    let p_dark: Option<T> = opt("model.p_dark", &raw.p_dark)?;
    let Some(eta) = eta else {
        if raw.is_empty() {
            return Ok((None, None));
        }
        return Err(CliError::Validation("model: eta is required".into()));
    };
    let build = |name: &str, a: T, b: T| -> CliResult<ChannelParams<T>> {
        let p = ChannelParams::new_unchecked(a, b, eta.clone());
        match p.validate() {
            Ok(()) => Ok(p),
            Err(_) if allow_out_of_domain => Ok(p),
            Err(e) => Err(CliError::Validation(format!("{name}: {e}"))),
        }
    };
    let yields = match b.clone().or_else(|| p_dark.clone()) {
        Some(b) => Some(build("model", a.unwrap_or_else(T::one), b)?),
        None => None,
    };
    let errors = match e_det {
        Some(e_det) => {
            let p_dark = p_dark.or(b).ok_or_else(|| CliError::Validation("model: e_det needs p_dark (or B)".into()))?;
            let params = build("error model", e_det.clone(), p_dark.clone() / T::from_int(2))?;
            Some((params, ErrorModel { e_det, p_dark }))
        }
        None => None,
    };
    if yields.as_ref().is_some_and(|p| !p.in_domain()) || errors.as_ref().is_some_and(|(p, _)| !p.in_domain()) {
        warnings.push("channel parameters outside 0 <= A <= 1, 0 <= B <= eta <= 1/10 accepted on request".into());
    }
    Ok((yields, errors))
}

/// Converts to precision `T` and checks every invariant that does not depend on the mode.
pub fn typed<T: Real>(raw: &RawInput, allow_out_of_domain: bool) -> CliResult<Parsed<T>> {
    let mut warnings = Vec::new();
    let mu: Vec<T> = list("intensities", &raw.intensities)?;
    PrecisionConfig::default().check_distinct(&mu)?;
    let (yields_model, errors_model) = match &raw.model {
        Some(m) => resolve_model(m, allow_out_of_domain, &mut warnings)?,
        None => (None, None),
    };
    let y0 = match (opt::<T>("y0", &raw.y0)?, &yields_model) {
        (Some(y0), _) => y0,
        (None, Some(p)) => p.vacuum_yield(),
        (None, None) => return Err(CliError::Validation("y0 is required unless a model with B or p_dark is given".into())),
    };
    let set = IntensitySet::new(mu, y0)?;
    let q = raw.q.as_ref().map(|v| list("Q", v)).transpose()?;
    let e = raw.e.as_ref().map(|v| list("E", v)).transpose()?;
    if e.is_some() && q.is_none() {
        return Err(CliError::Validation("error rates E given without detection rates Q".into()));
    }
    if let Some(s) = raw.signal {
        if s == 0 || s > set.len() {
            return Err(CliError::Validation(format!("signal index {s} outside 1..={}", set.len())));
        }
    }
    let parsed = Parsed {
        set,
        q,
        e,
        yields_model,
        errors_model,
        signal: raw.signal,
        f: opt("f", &raw.f)?,
        warnings,
    };
    if parsed.q.is_some() {
        parsed.record()?;
    }
    Ok(parsed)
}
