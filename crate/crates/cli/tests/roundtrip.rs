use decoy_cli::input::{parse_csv, parse_json, Decimal, RawInput, RawModel};
use decoy_cli::pipeline::{golden_input, run, synth, Mode, RunConfig, SynthSource};
use decoy_cli::report::Report;
use decoy_core::bounds::{analyze, BoundsOptions};
use decoy_core::model::{to_constraint_rhs, ChannelParams, ConstraintKind, IntensitySet, MeasurementRecord};
use decoy_core::{Mp256, Real, Scalar};

type M = Mp256;

fn dec(s: &str) -> M {
    M::parse_decimal(s).unwrap()
}

fn close(text: &str, value: &M) {
    let parsed = dec(text);
    let scale = if value.to_f64_lossy().abs() > 1e-300 { value.to_f64_lossy().abs() } else { 1.0 };
    let rel = (parsed - value.clone()).to_f64_lossy().abs() / scale;
    assert!(rel < 1e-29, "{text} vs {value}: {rel:e}");
}

fn golden_with_errors() -> RawInput {
    let mut raw = golden_input();
    let model = raw.model.as_mut().unwrap();
    model.e_det = Some(Decimal("0.033".into()));
    model.p_dark = Some(Decimal("1e-5".into()));
    raw
}

#[test]
fn report_json_reparses_to_in_memory_values() {
    let (doc, _) = synth(&golden_with_errors(), 256, SynthSource::Model, 0).unwrap();
    let cfg = RunConfig {
        mode: Mode::Both,
        ..RunConfig::default()
    };
    let outcome = run(&doc, &cfg).unwrap();
    let back: Report = serde_json::from_str(&outcome.report.to_json()).unwrap();
    assert_eq!(back, outcome.report);

    // in-memory computation straight from the core, on the same decimal inputs
    let params = ChannelParams::new(dec("1"), dec("1e-5"), dec("0.01")).unwrap();
    let strings = |v: &[Decimal]| v.iter().map(|d| dec(&d.0)).collect::<Vec<M>>();
    let set = IntensitySet::new(strings(&doc.intensities), dec(&doc.y0.as_ref().unwrap().0)).unwrap();
    let record = MeasurementRecord::new(&set, strings(doc.q.as_ref().unwrap()), None).unwrap();
    let rhs = to_constraint_rhs(&record, &set, ConstraintKind::Yields).unwrap();
    let core = analyze(&set, &rhs, Some(&params), &BoundsOptions::default()).unwrap();

    let a = back.analysis.as_ref().unwrap();
    for (text, v) in a.x_config.values.iter().zip(&core.x.values) {
        close(text, v);
    }
    for (text, v) in a.z_config.values.iter().zip(&core.z.values) {
        close(text, v);
    }
    close(&a.z_config.a0, &core.z.a0);
    assert_eq!(a.z_config.l0, core.z.l0);
    for (out, iv) in a.intervals.iter().zip(&core.intervals) {
        close(&out.lo, &iv.lo);
        close(&out.hi, &iv.hi);
        assert_eq!(out.exact, iv.exact);
    }
}

#[test]
fn synthesized_document_round_trips_through_both_formats() {
    let (doc, _) = synth(&golden_with_errors(), 256, SynthSource::Model, 0).unwrap();
    let json = serde_json::to_string(&doc).unwrap();
    assert_eq!(parse_json(&json).unwrap(), doc);
    let csv = decoy_cli::pipeline::input_to_csv(&doc);
    let back = parse_csv(&csv).unwrap();
    assert_eq!(back.intensities, doc.intensities);
    assert_eq!(back.q, doc.q);
    assert_eq!(back.e, doc.e);
    assert_eq!(back.y0, doc.y0);
    assert_eq!(back.model, doc.model);
}

#[test]
fn json_numbers_keep_their_digits() {
    let raw = parse_json(r#"{"intensities": [0.1000000000000000000000000000001], "y0": 1e-5}"#).unwrap();
    assert_eq!(raw.intensities[0].0, "0.1000000000000000000000000000001");
    assert_eq!(raw.y0.unwrap().0, "1e-5");
}

#[test]
fn unknown_keys_are_schema_errors() {
    let err = parse_json(r#"{"intensities": [0.1], "Qs": [0.001]}"#).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("Qs"));
    let err = parse_csv("bogus=1\n0.1,0.001\n").unwrap_err();
    assert!(err.to_string().contains("line 1"), "{err}");
}

#[test]
fn csv_row_shape_with_sidecar_y0() {
    let raw = parse_csv("y0=1e-5\n0.07,0.001695,0.03\n0.2,0.0041,0.03\n0.5,0.0093,0.03\n").unwrap();
    assert_eq!(raw.intensities.len(), 3);
    assert_eq!(raw.q.as_ref().unwrap()[0].0, "0.001695");
    assert_eq!(raw.e.as_ref().unwrap()[0].0, "0.03");
    assert_eq!(raw.y0.unwrap().0, "1e-5");
    assert_eq!(raw.model, None);
}

#[test]
fn model_defaults() {
    // B falls back to p_dark and A to one
    let raw = RawInput {
        intensities: vec![Decimal("0.1".into()), Decimal("0.4".into())],
        model: Some(RawModel {
            eta: Some(Decimal("0.02".into())),
            p_dark: Some(Decimal("2e-6".into())),
            ..RawModel::default()
        }),
        ..RawInput::default()
    };
    let (doc, _) = synth(&raw, 256, SynthSource::Model, 0).unwrap();
    assert_eq!(doc.y0.unwrap().0, "2e-6");
}
