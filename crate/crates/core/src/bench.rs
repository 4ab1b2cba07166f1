//! Runs a program unoptimized and optimized on the same seeded inputs and
//! checks the optimized run against the expectations registered for it.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::Annotations;
use crate::graph::{DspGraph, InputLengths, OpCode};
use crate::kernels::{eval_graph, printed_values, Tensor};
use crate::lowering::{counters_report, CounterReport, ExecCounters, Execution, RegionCounters};
use crate::pipeline::{compile, max_rel_deviation, synth_inputs, Compiled, PipelineError};
use crate::rewrite::{all_patterns, PatternId, PatternSet};

pub const DEVIATION_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub seed: u64,
    /// Wall times are averaged over this many runs.
    pub repetitions: usize,
    /// Overrides the lengths annotated in the source.
    pub lengths: InputLengths,
    pub patterns: PatternSet,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            seed: 1,
            repetitions: 5,
            lengths: InputLengths::new(),
            patterns: all_patterns(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub app: String,
    pub input_size: usize,
    pub inputs: BTreeMap<String, usize>,
    pub seed: u64,
    pub fired: Vec<String>,
    pub none: ExecCounters,
    pub dsp: ExecCounters,
    pub ratios: CounterReport,
    /// What the optimized outputs were compared with.
    pub reference: String,
    pub max_rel_deviation: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub regions_none: Vec<RegionCounters>,
    pub regions_dsp: Vec<RegionCounters>,
}

impl BenchReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Human-readable summary: counter table and check list.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{} (N = {}, seed {}), fired [{}]\n\n{}\nmax relative deviation vs {}: {:e}\n\n",
            self.app,
            self.input_size,
            self.seed,
            self.fired.join(","),
            self.ratios,
            self.reference,
            self.max_rel_deviation
        );
        for c in &self.checks {
            out.push_str(&format!(
                "{} {}: {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        out
    }
}

struct Timed {
    exec: Execution,
    deterministic: bool,
}

/// Runs `reps` times; the first execution is kept with the mean wall time.
fn run_repeated(
    c: &Compiled,
    inputs: &BTreeMap<String, Tensor>,
    reps: usize,
) -> Result<Timed, PipelineError> {
    let mut first = c.run(inputs)?;
    let mut total = first.counters.wall_time_ns;
    let mut deterministic = true;
    for _ in 1..reps.max(1) {
        let e = c.run(inputs)?;
        deterministic &= e.counters.without_time() == first.counters.without_time()
            && e.outputs == first.outputs;
        total += e.counters.wall_time_ns;
    }
    first.counters.wall_time_ns = total / reps.max(1) as u64;
    Ok(Timed {
        exec: first,
        deterministic,
    })
}

fn attr_of(graph: &DspGraph, opcode: OpCode, name: &str) -> Option<i64> {
    graph
        .ops
        .iter()
        .find(|o| o.opcode == opcode)?
        .int_attr(name)
}

fn outer_trips<'a>(regions: impl Iterator<Item = &'a RegionCounters>) -> Vec<u64> {
    regions
        .map(|r| r.trips.first().copied().unwrap_or(0))
        .collect()
}

fn inner_trips<'a>(regions: impl Iterator<Item = &'a RegionCounters>) -> u64 {
    regions.map(|r| r.trips.get(1).copied().unwrap_or(0)).sum()
}

/// Average h loads per output sample of the first region of `opcode`.
fn h_loads_per_output(c: &Compiled, exec: &Execution, opcode: OpCode) -> Option<f64> {
    let op = c.optimized.ops.iter().find(|o| o.opcode == opcode)?;
    let h = c.program.value_buffers.get(&op.operands[1])?;
    let n = c.optimized.shape_of(op.operands[0])?.len;
    let region = exec.regions_of(opcode).next()?;
    Some(region.loads_from(*h) as f64 / n as f64)
}

type Pair = (Result<Timed, PipelineError>, Result<Timed, PipelineError>);

#[cfg(not(target_arch = "wasm32"))]
fn run_pair(
    none: &Compiled,
    dsp: &Compiled,
    inputs: &BTreeMap<String, Tensor>,
    reps: usize,
) -> Pair {
    std::thread::scope(|s| {
        let a = s.spawn(|| run_repeated(none, inputs, reps));
        let b = s.spawn(|| run_repeated(dsp, inputs, reps));
        (
            a.join().expect("bench thread panicked"),
            b.join().expect("bench thread panicked"),
        )
    })
}

// No threads on bare wasm.
#[cfg(target_arch = "wasm32")]
fn run_pair(
    none: &Compiled,
    dsp: &Compiled,
    inputs: &BTreeMap<String, Tensor>,
    reps: usize,
) -> Pair {
    (
        run_repeated(none, inputs, reps),
        run_repeated(dsp, inputs, reps),
    )
}

struct Checks(Vec<Check>);

impl Checks {
    fn add(&mut self, name: &str, passed: bool, detail: String) {
        self.0.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

/// Counter expectations for the bundled apps.
fn app_checks(
    app: &str,
    n: usize,
    none: (&Compiled, &Execution),
    dsp: (&Compiled, &Execution),
    checks: &mut Checks,
) {
    let (cn, en) = none;
    let (cd, ed) = dsp;
    match app {
        "FilterDesign" => {
            let taps = attr_of(&cn.graph, OpCode::LowPassFirCoeffs, "L").unwrap_or(0) as u64;
            // The centre tap of an odd filter needs no sinc.
            let before = 2 * taps - taps % 2;
            let after = 2 * taps.div_ceil(2) - taps % 2;
            let (b, a) = (en.counters.trig_calls, ed.counters.trig_calls);
            checks.add(
                "trig calls halved",
                b == before && a.abs_diff(after) <= 2,
                format!("{b} -> {a}, expected {before} -> {after} (+-2)"),
            );
            let ratio = a as f64 / b as f64;
            checks.add(
                "trig ratio in [0.48, 0.52]",
                (0.48..=0.52).contains(&ratio),
                format!("{ratio:.4}"),
            );
        }
        "LowPassFiltering" => {
            let taps = attr_of(&cn.graph, OpCode::LowPassFirCoeffs, "L").unwrap_or(0) as f64;
            let want_after = (taps as u64 / 2 + taps as u64 % 2) as f64;
            let b = h_loads_per_output(cn, en, OpCode::FirFilterResponse);
            let a = h_loads_per_output(cd, ed, OpCode::FilterResSymmOpt);
            checks.add(
                "h loads per output",
                b == Some(taps) && a == Some(want_after),
                format!("{b:?} -> {a:?}, expected {taps} -> {want_after}"),
            );
        }
        "EnergyOfSignal" => {
            let r = counters_report(&en.counters, &ed.counters);
            let mults = r.mults.ratio.unwrap_or(f64::INFINITY);
            checks.add("mult ratio <= 0.001", mults <= 0.001, format!("{mults:.6}"));
            checks.add(
                "no trig calls after",
                ed.counters.trig_calls == 0,
                format!("{}", ed.counters.trig_calls),
            );
            // No clock on wasm32; wall times are all zero there.
            if en.counters.wall_time_ns > 0 {
                let speedup =
                    en.counters.wall_time_ns as f64 / ed.counters.wall_time_ns.max(1) as f64;
                checks.add(
                    "wall-time speedup >= 5",
                    speedup >= 5.0,
                    format!("{speedup:.1}x"),
                );
            }
        }
        "SpectralAnalysis" => {
            let full = 2 * n as u64 - 1;
            let conv_b = outer_trips(en.regions_of(OpCode::Conv1DFull));
            let conv_a = outer_trips(ed.regions_of(OpCode::FilterYSymmOpt));
            checks.add(
                "convolution outer trips",
                conv_b == [full] && conv_a == [full.div_ceil(2)],
                format!(
                    "{conv_b:?} -> {conv_a:?}, expected [{full}] -> [{}]",
                    full.div_ceil(2)
                ),
            );
            let dft_b = outer_trips(
                en.regions_of(OpCode::Dft1DReal)
                    .chain(en.regions_of(OpCode::Dft1DImag)),
            );
            let dft_a = outer_trips(
                ed.regions_of(OpCode::Dft1DRealSymm)
                    .chain(ed.regions_of(OpCode::Dft1DImagSymm)),
            );
            let half = full / 2 + 1;
            checks.add(
                "DFT outer trips",
                dft_b == [full, full] && dft_a == [half, half],
                format!("{dft_b:?} -> {dft_a:?}, expected [{full}, {full}] -> [{half}, {half}]"),
            );
        }
        "AudioCompression" => {
            let sq = (n * n) as u64;
            let dfts = |e: &Execution| {
                inner_trips(e.regions.iter().filter(|r| {
                    matches!(
                        r.opcode,
                        OpCode::Dft1DReal | OpCode::Dft1DImag | OpCode::Dft1DFused
                    )
                }))
            };
            let (b, a) = (dfts(en), dfts(ed));
            checks.add(
                "DFT inner iterations halved",
                b == 2 * sq && a == sq,
                format!("{b} -> {a}, expected {} -> {sq}", 2 * sq),
            );
        }
        _ => {}
    }
}

/// Benchmarks `source`. `name` labels the report; the app's registered
/// expectations are looked up by its `# app:` annotation.
pub fn bench_source(
    source: &str,
    name: &str,
    config: &BenchConfig,
) -> Result<BenchReport, PipelineError> {
    let ann = Annotations::parse(source).unwrap_or_default();
    let mut lengths = ann.lengths();
    lengths.extend(config.lengths.clone());

    let none = compile(source, &lengths, None)?;
    let dsp = compile(source, &lengths, Some(&config.patterns))?;
    let inputs = synth_inputs(&none.graph, &lengths, config.seed);

    let reps = config.repetitions;
    let (rn, rd) = run_pair(&none, &dsp, &inputs, reps);
    let (rn, rd) = (rn?, rd?);

    let stats = dsp.stats.clone().unwrap_or_default();
    let fired = stats.fired();
    // The fused LMS recursion is not equivalent to LMS followed by a gain,
    // so those programs are checked against the fused recursion itself.
    let (reference, expected) = if fired.contains(&PatternId::LmsGainFusion) {
        let values = eval_graph(&dsp.optimized, &inputs)?;
        ("fused-recursion", printed_values(&dsp.optimized, &values))
    } else {
        ("opt=none", rn.exec.outputs.clone())
    };
    let deviation = max_rel_deviation(&expected, &rd.exec.outputs);

    let mut checks = Checks(Vec::new());
    checks.add(
        "outputs match reference",
        deviation <= DEVIATION_LIMIT,
        format!("max relative deviation {deviation:e} vs {reference}"),
    );
    checks.add(
        "counters deterministic",
        rn.deterministic && rd.deterministic,
        format!("{reps} runs each"),
    );
    if let Some(want) = &ann.expect_patterns {
        let show = |s: &PatternSet| s.iter().map(|p| p.label()).collect::<Vec<_>>().join(",");
        checks.add(
            "fired patterns match annotation",
            &fired == want,
            format!("fired [{}], expected [{}]", show(&fired), show(want)),
        );
    }
    if !fired.is_empty() {
        let (b, a) = (rn.exec.counters, rd.exec.counters);
        checks.add(
            "optimized never worse",
            a.mults <= b.mults && a.trig_calls <= b.trig_calls,
            format!(
                "mults {} -> {}, trig {} -> {}",
                b.mults, a.mults, b.trig_calls, a.trig_calls
            ),
        );
    }
    let input_size = none
        .graph
        .inputs()
        .first()
        .and_then(|(n, _)| lengths.get(n).copied())
        .unwrap_or(0);
    let app = ann.app.clone().unwrap_or_else(|| name.to_string());
    app_checks(
        &app,
        input_size,
        (&none, &rn.exec),
        (&dsp, &rd.exec),
        &mut checks,
    );

    let checks = checks.0;
    Ok(BenchReport {
        app,
        input_size,
        inputs: lengths,
        seed: config.seed,
        fired: fired.iter().map(|p| p.label().to_string()).collect(),
        none: rn.exec.counters,
        dsp: rd.exec.counters,
        ratios: counters_report(&rn.exec.counters, &rd.exec.counters),
        reference: reference.to_string(),
        max_rel_deviation: deviation,
        passed: checks.iter().all(|c| c.passed),
        checks,
        regions_none: rn.exec.regions,
        regions_dsp: rd.exec.regions,
    })
}
