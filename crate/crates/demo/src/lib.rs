//! Browser bindings for the instrument validity test.
//!
//! Every export returns a JSON string. Failures come back as
//! `{"error": "..."}` rather than as a thrown exception, which keeps the
//! functions callable (and testable) outside a JavaScript host.

use std::fmt::Write;

use ait_core::synth::{
    generate, motivating_example, DiscreteViolation, LabeledDataset, MotivatingKind, NoiseDistribution, RowFunction,
    ScenarioFamily, ScenarioSpec,
};
use ait_core::{ait_test, AitConfig, AitResult, ColumnRoles, EffectMode, Error};
use wasm_bindgen::prelude::wasm_bindgen;

/// Points sent to the page for the scatter plot.
const MAX_POINTS: usize = 800;
const MAX_N: usize = 20_000;

fn num(out: &mut String, v: f64) {
    if v.is_finite() {
        write!(out, "{v}").unwrap();
    } else {
        out.push_str("null");
    }
}

fn string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => write!(out, "\\u{:04x}", c as u32).unwrap(),
            c => out.push(c),
        }
    }
    out.push('"');
}

fn array(out: &mut String, v: &[f64], stride: usize) {
    out.push('[');
    for (i, x) in v.iter().step_by(stride).enumerate() {
        if i > 0 {
            out.push(',');
        }
        num(out, *x);
    }
    out.push(']');
}

fn error_json(e: impl std::fmt::Display) -> String {
    let mut out = String::from("{\"error\":");
    string(&mut out, &e.to_string());
    out.push('}');
    out
}

/// One candidate's result, with a thinned copy of the auxiliary variable
/// and the candidate residual for plotting.
fn candidate_json(out: &mut String, name: &str, label: Option<&str>, r: &AitResult) {
    out.push_str("{\"candidate\":");
    string(out, name);
    if let Some(l) = label {
        out.push_str(",\"label\":");
        string(out, l);
    }
    out.push_str(",\"p_value\":");
    num(out, r.p_value);
    out.push_str(",\"alpha\":");
    num(out, r.alpha_used);
    out.push_str(",\"rejected\":");
    out.push_str(if r.decision.rejected() { "true" } else { "false" });
    out.push_str(",\"decision\":");
    string(out, r.decision.describe());
    out.push_str(",\"estimator\":");
    string(out, r.fitted.method.name());
    out.push_str(",\"hsic\":");
    string(out, r.independence.method.name());
    out.push_str(",\"x_coefficients\":");
    array(out, &r.fitted.x_coefficients, 1);
    let stride = r.auxiliary.len().div_ceil(MAX_POINTS).max(1);
    out.push_str(",\"z\":");
    array(out, &r.residual_z, stride);
    out.push_str(",\"a\":");
    array(out, &r.auxiliary, stride);
    out.push('}');
}

fn config(effect: &str, seed: u32) -> Result<AitConfig, String> {
    let effect_mode = match effect {
        "constant" => EffectMode::Constant,
        "nonconstant" => EffectMode::NonConstant,
        other => return Err(format!("unknown effect mode '{other}'")),
    };
    Ok(AitConfig {
        effect_mode,
        seed: seed as u64,
        ..AitConfig::default()
    })
}

fn check_n(n: u32) -> Result<usize, String> {
    let n = n as usize;
    if n > MAX_N {
        return Err(format!("n = {n} is too large for the browser demo (max {MAX_N})"));
    }
    Ok(n)
}

fn test_all(ds: &LabeledDataset, cfg: &AitConfig, title: &str) -> Result<String, Error> {
    let mut out = String::from("{\"title\":");
    string(&mut out, title);
    write!(out, ",\"n\":{},\"candidates\":[", ds.data.n()).unwrap();
    for i in 0..ds.data.num_candidates() {
        let r = ait_test(&ds.data, i, cfg)?;
        if i > 0 {
            out.push(',');
        }
        let name = &ds.data.roles().z_names[i];
        candidate_json(&mut out, name, Some(ds.labels[i].name()), &r);
    }
    out.push_str("]}");
    Ok(out)
}

fn scenario_spec(scenario: &str, option: &str) -> Result<ScenarioSpec, Error> {
    let spec = match ScenarioFamily::parse(scenario)? {
        ScenarioFamily::LinearExogeneity => ScenarioSpec::linear_exogeneity(NoiseDistribution::parse(option)?),
        ScenarioFamily::NonlinConstExogeneity => ScenarioSpec::nonlin_const_exogeneity(RowFunction::parse(option)?),
        ScenarioFamily::NonlinNonConstExogeneity => {
            ScenarioSpec::nonlin_nonconst_exogeneity(RowFunction::parse(option)?)
        }
        ScenarioFamily::NonlinConstExclusion => ScenarioSpec::nonlin_const_exclusion(RowFunction::parse(option)?),
        ScenarioFamily::NonlinNonConstExclusion => ScenarioSpec::nonlin_nonconst_exclusion(RowFunction::parse(option)?),
        ScenarioFamily::CovariateLinear => {
            let q = option
                .parse()
                .map_err(|_| Error::InvalidParams(format!("covariate count '{option}'")))?;
            ScenarioSpec::covariate_linear(q)
        }
        ScenarioFamily::DiscreteTreatment => ScenarioSpec::discrete_treatment(DiscreteViolation::parse(option)?),
    };
    Ok(spec)
}

/// Runs one of the three motivating examples (`linear-gaussian`,
/// `linear-partial-nongaussian`, `partial-nonlinear-gaussian`) and tests
/// its single candidate with a constant-effect fit.
#[wasm_bindgen]
pub fn motivating_demo(kind: &str, n: u32, seed: u32) -> String {
    let run = || -> Result<String, String> {
        let kind = MotivatingKind::parse(kind).map_err(|e| e.to_string())?;
        let ds = motivating_example(kind, check_n(n)?, seed as u64).map_err(|e| e.to_string())?;
        test_all(&ds, &config("constant", seed)?, kind.name()).map_err(|e| e.to_string())
    };
    run().unwrap_or_else(error_json)
}

/// Simulates a benchmark scenario and tests every candidate it contains.
/// `option` is the noise distribution, the nonlinear function, the
/// covariate count or the discrete violation, depending on the scenario.
#[wasm_bindgen]
pub fn scenario_demo(scenario: &str, option: &str, n: u32, seed: u32) -> String {
    let run = || -> Result<String, String> {
        let spec = scenario_spec(scenario, option).map_err(|e| e.to_string())?;
        let ds = generate(&spec, check_n(n)?, seed as u64).map_err(|e| e.to_string())?;
        let effect = if spec.family.constant_effect() {
            "constant"
        } else {
            "nonconstant"
        };
        test_all(&ds, &config(effect, seed)?, &spec.label()).map_err(|e| e.to_string())
    };
    run().unwrap_or_else(error_json)
}

/// Tests candidates in pasted CSV text. `z` and `w` are comma-separated
/// column names; `w` may be empty.
#[wasm_bindgen]
pub fn csv_demo(text: &str, x: &str, y: &str, z: &str, w: &str, effect: &str, seed: u32) -> String {
    let split = |s: &str| -> Vec<String> {
        s.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect()
    };
    let run = || -> Result<String, String> {
        let cfg = config(effect, seed)?;
        let roles = ColumnRoles::new(x.trim(), y.trim(), split(z), split(w)).map_err(|e| e.to_string())?;
        let data = ait_core::data::parse_csv(text, &roles).map_err(|e| e.to_string())?;
        check_n(data.n() as u32)?;
        let mut out = String::from("{\"title\":\"pasted data\",");
        write!(out, "\"n\":{},\"candidates\":[", data.n()).unwrap();
        for (i, name) in roles.z_names.iter().enumerate() {
            let r = ait_test(&data, i, &cfg).map_err(|e| format!("{name}: {e}"))?;
            if i > 0 {
                out.push(',');
            }
            candidate_json(&mut out, name, None, &r);
        }
        out.push_str("]}");
        Ok(out)
    };
    run().unwrap_or_else(error_json)
}
