//! Browser bindings for the compiler demo page in `www/`.
//!
//! Each export has a plain Rust counterpart returning `Result<String, String>`
//! so the logic can be tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use dspc_core::bench::{bench_source, BenchConfig};
use dspc_core::corpus::{find_app, Annotations, APPS};
use dspc_core::graph::{graph_to_text, InputLengths};
use dspc_core::kernels::{eval_graph, printed_values};
use dspc_core::lowering::program_to_text;
use dspc_core::pipeline::{compile, synth_inputs};
use dspc_core::rewrite::all_patterns;

/// Lengths from the source's `# input:` lines, each overridden by `size`
/// when it is non-zero.
fn lengths(source: &str, size: usize) -> Result<InputLengths, String> {
    let mut lengths = Annotations::parse(source)?.lengths();
    if size > 0 {
        lengths.values_mut().for_each(|n| *n = size);
    }
    Ok(lengths)
}

/// Graph or loop dump of `source`. `stage` is `dsp` or `loop`.
pub fn compile_text(
    source: &str,
    stage: &str,
    optimize: bool,
    size: usize,
) -> Result<String, String> {
    let lengths = lengths(source, size)?;
    let patterns = all_patterns();
    let c = compile(source, &lengths, optimize.then_some(&patterns)).map_err(|e| e.to_string())?;
    match stage {
        "dsp" => Ok(graph_to_text(&c.optimized)),
        "loop" => Ok(program_to_text(&c.program)),
        _ => Err(format!("unknown stage `{stage}`")),
    }
}

#[derive(Serialize)]
struct FilterDesign {
    coeffs: Vec<f64>,
    trig_none: u64,
    trig_dsp: u64,
    fired: Vec<String>,
}

/// Windowed low-pass design with both pipelines.
pub fn filter_design_json(taps: usize, cutoff: f64) -> Result<String, String> {
    let source = format!(
        "def main() {{ print(lowPassFIRFilter({taps}, {cutoff:?}) * hammingWindow({taps})); }}"
    );
    let none = compile(&source, &InputLengths::new(), None).map_err(|e| e.to_string())?;
    let dsp =
        compile(&source, &InputLengths::new(), Some(&all_patterns())).map_err(|e| e.to_string())?;
    let inputs = Default::default();
    let a = none.run(&inputs).map_err(|e| e.to_string())?;
    let b = dsp.run(&inputs).map_err(|e| e.to_string())?;
    let design = FilterDesign {
        coeffs: b.outputs[0].values().to_vec(),
        trig_none: a.counters.trig_calls,
        trig_dsp: b.counters.trig_calls,
        fired: dsp
            .stats
            .map(|s| s.fired().iter().map(|p| p.label().to_string()).collect())
            .unwrap_or_default(),
    };
    Ok(serde_json::to_string(&design).expect("finite design"))
}

/// Bench report of a bundled app, one repetition.
pub fn bench_app_json(name: &str, size: usize) -> Result<String, String> {
    let app = find_app(name).ok_or_else(|| format!("no app `{name}`"))?;
    let config = BenchConfig {
        repetitions: 1,
        lengths: lengths(app.source, size)?,
        ..BenchConfig::default()
    };
    let report = bench_source(app.source, app.name, &config).map_err(|e| e.to_string())?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

/// Printed values of `source` evaluated on the reference kernels.
pub fn evaluate_json(source: &str, size: usize, seed: u64) -> Result<String, String> {
    let lengths = lengths(source, size)?;
    let c = compile(source, &lengths, None).map_err(|e| e.to_string())?;
    let inputs = synth_inputs(&c.graph, &lengths, seed);
    let values = eval_graph(&c.graph, &inputs).map_err(|e| e.to_string())?;
    let printed: Vec<Vec<f64>> = printed_values(&c.graph, &values)
        .iter()
        .map(|t| t.values().to_vec())
        .collect();
    serde_json::to_string(&printed).map_err(|e| e.to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = appNames)]
pub fn app_names() -> Vec<String> {
    APPS.iter().map(|a| a.name.to_string()).collect()
}

#[wasm_bindgen(js_name = appSource)]
pub fn app_source(name: &str) -> Option<String> {
    find_app(name).map(|a| a.source.to_string())
}

#[wasm_bindgen(js_name = compileText)]
pub fn compile_text_js(
    source: &str,
    stage: &str,
    optimize: bool,
    size: usize,
) -> Result<String, JsValue> {
    js(compile_text(source, stage, optimize, size))
}

#[wasm_bindgen(js_name = filterDesign)]
pub fn filter_design_js(taps: usize, cutoff: f64) -> Result<String, JsValue> {
    js(filter_design_json(taps, cutoff))
}

#[wasm_bindgen(js_name = benchApp)]
pub fn bench_app_js(name: &str, size: usize) -> Result<String, JsValue> {
    js(bench_app_json(name, size))
}

#[wasm_bindgen]
pub fn evaluate(source: &str, size: usize, seed: u32) -> Result<String, JsValue> {
    js(evaluate_json(source, size, seed as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compiles_bundled_apps() {
        let src = app_source("EnergyOfSignal").unwrap();
        let text = compile_text(&src, "dsp", true, 0).unwrap();
        assert!(text.contains("square") && !text.contains("dft"));
        assert!(compile_text(&src, "loop", false, 8)
            .unwrap()
            .contains("for i"));
        assert!(compile_text(&src, "asm", false, 8).is_err());
        assert!(compile_text("def main( {", "dsp", false, 0)
            .unwrap_err()
            .contains("1:11"));
    }

    #[test]
    fn filter_design_halves_trig() {
        let v: serde_json::Value =
            serde_json::from_str(&filter_design_json(21, 0.5).unwrap()).unwrap();
        assert_eq!(v["coeffs"].as_array().unwrap().len(), 21);
        assert_eq!(v["trig_none"], 41);
        assert_eq!(v["trig_dsp"], 21);
        assert_eq!(v["fired"][0], "1");
    }

    #[test]
    fn bench_report_passes() {
        let v: serde_json::Value =
            serde_json::from_str(&bench_app_json("SpectralAnalysis", 31).unwrap()).unwrap();
        assert_eq!(v["input_size"], 31);
        assert_eq!(v["passed"], true);
        assert!(bench_app_json("nope", 0).is_err());
    }

    #[test]
    fn evaluates_on_kernels() {
        let v: Vec<Vec<f64>> = serde_json::from_str(
            &evaluate_json("def main(x) { print(sum(x)); }\n# input: x=4", 0, 1).unwrap(),
        )
        .unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(app_names().len(), 7);
    }
}
