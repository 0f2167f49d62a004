//! validate → constraint right-hand sides → X/Z → intervals → oracle → key rate.

use decoy_core::bounds::{analyze, BoundsOptions, BoundsReport};
use decoy_core::keyrate::{key_rate, key_rate_added_sign, KeyRateInput, DEFAULT_F};
use decoy_core::model::{synthesize, to_constraint_rhs, ChannelParams, ConstraintKind, IntensitySet};
use decoy_core::oracle::{push_forward, sample_feasible, verify_report, OracleReport, AGREEMENT_TOLERANCE};
use decoy_core::symfunc::PrecisionConfig;
use decoy_core::{Mp1024, Mp128, Mp256, Mp512, Mp64, Real, Scalar};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};
use crate::input::{typed, Decimal, Parsed, RawInput, RawModel};
use crate::report::{num, nums, Analysis, KeyRateOut, Measurements, ModelOut, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Yields,
    Errors,
    Both,
    Synth,
    Verify,
    Keyrate,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Yields => "yields",
            Mode::Errors => "errors",
            Mode::Both => "both",
            Mode::Synth => "synth",
            Mode::Verify => "verify",
            Mode::Keyrate => "keyrate",
        }
    }
}

pub const SUPPORTED_BITS: [u32; 5] = [64, 128, 256, 512, 1024];

/// Rounds a requested width up to a supported one; the note says when it had to.
pub fn resolve_precision(requested: u32) -> CliResult<(u32, Option<String>)> {
    if requested < PrecisionConfig::MIN_BITS {
        return Err(CliError::Validation(format!(
            "precision must be at least {} bits, got {requested}",
            PrecisionConfig::MIN_BITS
        )));
    }
    let bits = SUPPORTED_BITS
        .into_iter()
        .find(|&b| b >= requested)
        .ok_or_else(|| CliError::Validation(format!("precision above 1024 bits is not supported, got {requested}")))?;
    let note = (bits != requested).then(|| format!("precision {requested} bits rounded up to {bits}"));
    Ok((bits, note))
}

/// Calls `$f::<T>(args…)` with `T` the multiprecision type of width `$bits`.
macro_rules! at_precision {
    ($bits:expr, $f:ident($($arg:expr),*)) => {
        match $bits {
            64 => $f::<Mp64>($($arg),*),
            128 => $f::<Mp128>($($arg),*),
            256 => $f::<Mp256>($($arg),*),
            512 => $f::<Mp512>($($arg),*),
            1024 => $f::<Mp1024>($($arg),*),
            other => Err(CliError::Validation(format!("unsupported precision {other}"))),
        }
    };
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    /// One of [`SUPPORTED_BITS`].
    pub precision_bits: u32,
    pub cap: usize,
    pub oracle_n: Option<usize>,
    pub verify: bool,
    pub signal: Option<usize>,
    pub f: Option<String>,
    pub allow_out_of_domain: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Yields,
            precision_bits: PrecisionConfig::DEFAULT_BITS,
            cap: decoy_core::bounds::DEFAULT_SEARCH_CAP,
            oracle_n: None,
            verify: false,
            signal: None,
            f: None,
            allow_out_of_domain: false,
        }
    }
}

/// A report plus the failure that should set the exit code, if any.
///
/// Oracle disagreement still produces a full report so both values can be shown.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub failure: Option<CliError>,
}

pub fn run(raw: &RawInput, cfg: &RunConfig) -> CliResult<Outcome> {
    at_precision!(cfg.precision_bits, run_at(raw, cfg))
}

fn kinds(mode: Mode, has_errors: bool) -> Vec<ConstraintKind> {
    match mode {
        Mode::Yields => vec![ConstraintKind::Yields],
        Mode::Errors => vec![ConstraintKind::ErrorProducts],
        Mode::Both | Mode::Keyrate => vec![ConstraintKind::Yields, ConstraintKind::ErrorProducts],
        Mode::Verify | Mode::Synth if has_errors => vec![ConstraintKind::Yields, ConstraintKind::ErrorProducts],
        Mode::Verify | Mode::Synth => vec![ConstraintKind::Yields],
    }
}

fn kind_name(kind: ConstraintKind) -> &'static str {
    match kind {
        ConstraintKind::Yields => "yields",
        ConstraintKind::ErrorProducts => "error_products",
    }
}

struct Computed<T> {
    kind: ConstraintKind,
    report: BoundsReport<T>,
    oracle: Option<OracleReport<T>>,
}

pub fn run_at<T: Real>(raw: &RawInput, cfg: &RunConfig) -> CliResult<Outcome> {
    let parsed: Parsed<T> = typed(raw, cfg.allow_out_of_domain)?;
    let record = parsed.record()?;
    let mut warnings = parsed.warnings.clone();
    let opts = BoundsOptions {
        precision: PrecisionConfig::new(cfg.precision_bits, PrecisionConfig::DEFAULT_GAP)?,
        cap: cfg.cap,
    };
    let verify = cfg.verify || cfg.mode == Mode::Verify;

    let mut computed = Vec::new();
    for kind in kinds(cfg.mode, record.e.is_some()) {
        let rhs = to_constraint_rhs(&record, &parsed.set, kind)?;
        let params = match kind {
            ConstraintKind::Yields => parsed.yields_model.as_ref(),
            ConstraintKind::ErrorProducts => parsed.errors_model.as_ref().map(|(p, _)| p),
        };
        let report = analyze(&parsed.set, &rhs, params, &opts)?;
        let oracle = if verify {
            Some(verify_report(parsed.set.mu(), &rhs, &report, cfg.oracle_n)?)
        } else {
            None
        };
        warnings.extend(report.warnings.iter().map(|w| format!("{}: {w}", kind_name(kind))));
        computed.push(Computed { kind, report, oracle });
    }

    let yields = computed.iter().find(|c| c.kind == ConstraintKind::Yields);
    let errors = computed.iter().find(|c| c.kind == ConstraintKind::ErrorProducts);
    let key_rate = match (yields, errors) {
        (Some(y), Some(b)) => Some(key_rate_block(&parsed, &record.q, record.e.as_deref(), y, b, cfg)?),
        _ => None,
    };
    if let Some(k) = &key_rate {
        if !k.secure {
            warnings.push("key rate is not positive: no secure key at this signal intensity".into());
        }
    }

    let mut failure = None;
    for c in &computed {
        if let Some(o) = &c.oracle {
            if let Some(d) = o.deltas.iter().find(|d| !d.agrees(AGREEMENT_TOLERANCE)) {
                let iv = c.report.interval(d.n);
                failure = Some(CliError::Verify(format!(
                    "{} n = {}: bounds [{}, {}] vs truncated LP (N = {}) [{}, {}], tolerance {:e}",
                    kind_name(c.kind),
                    d.n,
                    num(&iv.lo),
                    num(&iv.hi),
                    o.n_trunc,
                    num(&d.lp_min),
                    num(&d.lp_max),
                    AGREEMENT_TOLERANCE
                )));
                break;
            }
        }
    }

    let mut analyses = computed
        .iter()
        .map(|c| Analysis::from_core(kind_name(c.kind), &c.report, c.oracle.as_ref()));
    let analysis = analyses.next();
    let error_products = analyses.next();
    let report = Report {
        mode: cfg.mode.as_str().to_owned(),
        precision_bits: cfg.precision_bits,
        intensities: nums(parsed.set.mu()),
        y0: num(parsed.set.y0()),
        model: model_out(&parsed),
        measurements: Some(Measurements {
            q: nums(&record.q),
            e: record.e.as_deref().map(nums),
        }),
        analysis,
        error_products,
        key_rate,
        errors: failure.iter().map(CliError::to_object).collect(),
        warnings,
    };
    Ok(Outcome { report, failure })
}

fn model_out<T: Real>(p: &Parsed<T>) -> Option<ModelOut> {
    if p.yields_model.is_none() && p.errors_model.is_none() {
        return None;
    }
    let y = p.yields_model.as_ref();
    let e = p.errors_model.as_ref();
    Some(ModelOut {
        a: y.map(|m| num(&m.a)),
        b: y.map(|m| num(&m.b)),
        eta: y.or(e.map(|(m, _)| m)).map(|m| num(&m.eta)),
        e_det: e.map(|(_, em)| num(&em.e_det)),
        p_dark: e.map(|(_, em)| num(&em.p_dark)),
        in_domain: y.is_none_or(ChannelParams::in_domain) && e.is_none_or(|(m, _)| m.in_domain()),
    })
}

fn key_rate_block<T: Real>(
    parsed: &Parsed<T>,
    q: &[T],
    e: Option<&[T]>,
    yields: &Computed<T>,
    errors: &Computed<T>,
    cfg: &RunConfig,
) -> CliResult<KeyRateOut> {
    let e = e.ok_or_else(|| CliError::Validation("key rate needs error rates E".into()))?;
    let m = parsed.set.len();
    let signal = cfg.signal.or(parsed.signal).unwrap_or(m);
    if signal == 0 || signal > m {
        return Err(CliError::Validation(format!("signal index {signal} outside 1..={m}")));
    }
    let f = match &cfg.f {
        Some(s) => Decimal(s.clone()).parse::<T>("--f")?,
        None => match parsed.f.clone() {
            Some(f) => f,
            None => Decimal(DEFAULT_F.to_string()).parse::<T>("f")?,
        },
    };
    let i = signal - 1;
    let mu = &parsed.set.mu()[i];
    let y1 = yields.report.interval(1).lo.clone();
    let b1 = errors.report.interval(1).hi.clone();
    let input = KeyRateInput::from_bounds(mu, q[i].clone(), e[i].clone(), parsed.set.y0(), &y1, &b1, f)?;
    let rate = key_rate(&input)?;
    let added = key_rate_added_sign(&input)?;
    Ok(KeyRateOut {
        signal,
        mu: num(mu),
        q: num(&input.q),
        e: num(&input.e),
        q0: num(&input.q0),
        q1: num(&input.q1),
        y1_lower: num(&y1),
        b1_upper: num(&b1),
        e1_upper: num(&input.e1_upper),
        f: num(&input.f),
        secure: rate.gt_zero(),
        rate: num(&rate),
        rate_added_sign: num(&added),
    })
}

/// What `synth` draws the data from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthSource {
    /// The channel model in the input.
    Model,
    /// Uniform random yields `y_1..y_N` from the seeded generator.
    RandomYields(usize),
}

/// The synthesized data as an input document, plus notes for stderr.
pub fn synth(raw: &RawInput, bits: u32, source: SynthSource, seed: u64) -> CliResult<(RawInput, Vec<String>)> {
    at_precision!(bits, synth_at(raw, source, seed))
}

fn decimals<T: Real>(xs: &[T]) -> Vec<Decimal> {
    nums(xs).into_iter().map(Decimal).collect()
}

pub fn synth_at<T: Real>(raw: &RawInput, source: SynthSource, seed: u64) -> CliResult<(RawInput, Vec<String>)> {
    let mut notes = Vec::new();
    let mut out = RawInput {
        intensities: raw.intensities.clone(),
        model: raw.model.clone(),
        signal: raw.signal,
        f: raw.f.clone(),
        ..RawInput::default()
    };
    let mu: Vec<T> = raw
        .intensities
        .iter()
        .enumerate()
        .map(|(i, d)| d.parse(&format!("intensities[{i}]")))
        .collect::<CliResult<_>>()?;
    let model = raw.model.clone().unwrap_or_default();
    let (yields_model, errors_model) = crate::input::resolve_model::<T>(&model, false, &mut notes)?;
    match source {
        SynthSource::Model => {
            let params = yields_model
                .ok_or_else(|| CliError::Validation("synth needs model.eta and model.B (or p_dark)".into()))?;
            let s = synthesize(mu, &params, errors_model.as_ref().map(|(_, em)| em))?;
            out.y0 = Some(Decimal(num(s.set.y0())));
            out.q = Some(decimals(&s.record.q));
            out.e = s.record.e.as_deref().map(decimals);
            notes.extend(s.notes);
        }
        SynthSource::RandomYields(n) => {
            if n == 0 {
                return Err(CliError::Validation("random support size must be positive".into()));
            }
            let y0 = match (&raw.y0, &yields_model) {
                (Some(d), _) => d.parse::<T>("y0")?,
                (None, Some(p)) => p.vacuum_yield(),
                (None, None) => T::zero(),
            };
            let set = IntensitySet::new(mu, y0.clone())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y: Vec<T> = sample_feasible(&mut rng, n, 1).remove(0);
            let q: Vec<T> = set
                .mu()
                .iter()
                .map(|m| (-m.clone()).exp() * (y0.clone() + push_forward(&y, m)))
                .collect();
            out.y0 = Some(Decimal(num(&y0)));
            out.q = Some(decimals(&q));
            out.yields = Some(decimals(&y));
        }
    }
    Ok((out, notes))
}

/// Sidecar lines and a `mu,Q[,E]` table, readable by the CSV input parser.
pub fn input_to_csv(doc: &RawInput) -> String {
    let mut out = String::new();
    let mut side = |k: &str, v: &Option<Decimal>| {
        if let Some(v) = v {
            out.push_str(&format!("{k}={}\n", v.0));
        }
    };
    side("y0", &doc.y0);
    let m = doc.model.clone().unwrap_or_default();
    side("A", &m.a);
    side("B", &m.b);
    side("eta", &m.eta);
    side("e_det", &m.e_det);
    side("p_dark", &m.p_dark);
    side("f", &doc.f);
    if let Some(s) = doc.signal {
        out.push_str(&format!("signal={s}\n"));
    }
    let with_e = doc.e.is_some();
    out.push_str(if with_e { "mu,Q,E\n" } else { "mu,Q\n" });
    for (i, mu) in doc.intensities.iter().enumerate() {
        let q = doc.q.as_ref().map_or("", |q| q[i].0.as_str());
        match &doc.e {
            Some(e) => out.push_str(&format!("{},{q},{}\n", mu.0, e[i].0)),
            None => out.push_str(&format!("{},{q}\n", mu.0)),
        }
    }
    out
}

/// The worked example: A = 1, η = 1e-2, B = 1e-5, μ = (0.07, 0.2, 0.5).
pub fn golden_input() -> RawInput {
    let d = |s: &str| Decimal(s.to_owned());
    RawInput {
        intensities: vec![d("0.07"), d("0.2"), d("0.5")],
        model: Some(RawModel {
            a: Some(d("1")),
            b: Some(d("1e-5")),
            eta: Some(d("1e-2")),
            ..RawModel::default()
        }),
        ..RawInput::default()
    }
}

/// One line of `selftest` output.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Reference figures for the worked example, each with an absolute tolerance of 1e-5.
pub const GOLDEN: [(&str, f64); 3] = [("Z_1", 0.993e-2), ("X_1", 1.003e-2), ("q_1", 1.001e-2)];
pub const GOLDEN_TOLERANCE: f64 = 1e-5;

/// Runs the worked example end to end at 256 bits, with oracle verification.
pub fn selftest() -> CliResult<Vec<Check>> {
    let started = std::time::Instant::now();
    let (doc, _) = synth_at::<Mp256>(&golden_input(), SynthSource::Model, 0)?;
    run_at::<Mp256>(&doc, &RunConfig::default())?;
    let elapsed = started.elapsed();
    let cfg = RunConfig {
        verify: true,
        ..RunConfig::default()
    };
    let outcome = run_at::<Mp256>(&doc, &cfg)?;
    let a = outcome
        .report
        .analysis
        .as_ref()
        .expect("yields analysis is always present");
    // n = 1 with M = 3: M − n even, so Z is the lower end.
    let z1: f64 = a.intervals[0].lo.parse().unwrap_or(f64::NAN);
    let x1: f64 = a.intervals[0].hi.parse().unwrap_or(f64::NAN);
    let params = ChannelParams::<Mp256>::new(Mp256::from_int(1), "1e-5".parse().expect("literal"), "1e-2".parse().expect("literal"))?;
    let q1 = decoy_core::model::yield_q(1, &params).to_f64_lossy();
    let mut checks: Vec<Check> = [z1, x1, q1]
        .into_iter()
        .zip(GOLDEN)
        .map(|(got, (name, want))| Check {
            name: name.to_owned(),
            pass: (got - want).abs() <= GOLDEN_TOLERANCE,
            detail: format!("computed {got:.6e}, reference {want:.3e}, |diff| {:.2e}", (got - want).abs()),
        })
        .collect();
    checks.push(Check {
        name: "exact".into(),
        pass: a.exact,
        detail: format!("exact = {}", a.exact),
    });
    let oracle = a.oracle.as_ref().expect("verification was requested");
    checks.push(Check {
        name: "oracle".into(),
        pass: oracle.agrees && outcome.failure.is_none(),
        detail: format!("truncated LP with N = {} agrees = {}", oracle.n_trunc, oracle.agrees),
    });
    checks.push(Check {
        name: "runtime".into(),
        pass: elapsed.as_secs_f64() < 1.0,
        detail: format!("{:.3} s for synthesis and bounds", elapsed.as_secs_f64()),
    });
    Ok(checks)
}
