use std::collections::BTreeMap;

use super::*;
use crate::frontend::parse_source;
use crate::graph::{build_graph, infer_shapes, DspGraph, InputLengths};
use crate::kernels::{eval_graph, printed_values, Tensor};
use crate::rewrite::{all_patterns, apply_dsp_patterns};

fn graph(src: &str, inputs: &[(&str, usize)]) -> DspGraph {
    let mut g = build_graph(&parse_source(src).unwrap()).unwrap();
    let lengths: InputLengths = inputs.iter().map(|(n, l)| (n.to_string(), *l)).collect();
    g.bind_input_lengths(&lengths);
    infer_shapes(&g).unwrap()
}

fn bind(inputs: &[(&str, Vec<f64>)]) -> BTreeMap<String, Tensor> {
    inputs
        .iter()
        .map(|(n, v)| (n.to_string(), Tensor::new(v.clone())))
        .collect()
}

fn exec(g: &DspGraph, inputs: &[(&str, Vec<f64>)]) -> Execution {
    evaluate_loop_ir(&lower_graph(g).unwrap(), &bind(inputs)).unwrap()
}

fn ramp(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| ((i * 7919) % 23) as f64 / 11.0 - 1.0)
        .collect()
}

fn assert_matches_kernels(g: &DspGraph, inputs: &[(&str, Vec<f64>)]) {
    let want = printed_values(g, &eval_graph(g, &bind(inputs)).unwrap());
    let got = exec(g, inputs).outputs;
    assert_eq!(want.len(), got.len());
    for (w, o) in want.iter().zip(&got) {
        assert_eq!(w.logical_len, o.logical_len);
        for (a, b) in w.values().iter().zip(o.values()) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn index_arithmetic() {
    let (i, j) = (LoopVar(0), LoopVar(1));
    let e = IndexExpr::from(10) - 1 - i;
    assert_eq!(e.eval(&[3, 0]), 6);
    assert_eq!(print::index_to_text(&e), "9 - i0");
    assert_eq!(print::index_to_text(&(i - j)), "i0 - i1");
    assert_eq!(print::index_to_text(&(i * 2 + 1 - 101)), "i0 * 2 - 100");
    assert_eq!(print::index_to_text(&(i - i)), "0");
    assert_eq!(
        print::index_to_text(&(i - (IndexExpr::from(7) - j))),
        "i0 + i1 - 7"
    );
}

#[test]
fn dft_real_on_eight() {
    let g = graph("def main(x) { print(dft1dreal(x)); }", &[("x", 8)]);
    let run = exec(&g, &[("x", ramp(8))]);
    let r = &run.regions[0];
    assert_eq!(r.trips, [8, 64]);
    assert_eq!(r.counters.trig_calls, 64);
    assert_eq!(r.counters.mults, 64);
    assert_eq!(r.counters.adds, 64);
    assert_matches_kernels(&g, &[("x", ramp(8))]);
}

#[test]
fn filter_hamm_opt_on_five() {
    let g = graph(
        "def main() { print(lowPassFIRFilter(5, 1) * hammingWindow(5)); }",
        &[],
    );
    let (opt, _) = apply_dsp_patterns(&g, &all_patterns()).unwrap();
    let run = exec(&opt, &[]);
    let r = &run.regions[0];
    assert_eq!(r.opcode, OpCode::FilterHammOpt);
    assert_eq!(r.trips, [3]);
    // Indices 0 and 1 store twice, the centre once.
    assert_eq!(r.counters.stores, 5);
    let want = exec(&g, &[]).outputs;
    for (a, b) in want[0].values().iter().zip(run.outputs[0].values()) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn delay_zero_is_a_copy() {
    let g = graph("def main(x) { print(delay(x, 0)); }", &[("x", 6)]);
    let run = exec(&g, &[("x", ramp(6))]);
    assert_eq!(run.regions[0].trips, [6]);
    assert_eq!(run.outputs[0].values(), ramp(6).as_slice());
}

#[test]
fn const_print_counts_nothing() {
    let g = graph("def main() { print([1, 2, 3]); }", &[]);
    let run = exec(&g, &[]);
    assert!(run.regions.is_empty());
    assert_eq!(run.counters.without_time(), ExecCounters::default());
    assert_eq!(run.outputs[0].values(), &[1.0, 2.0, 3.0]);
}

#[test]
fn energy_counts() {
    let n = 64;
    let src = format!(
        "def main(x) {{ var re = dft1dreal(x); var im = dft1dimg(x); \
         print(sum(square(re) + square(im)) / {n}); }}"
    );
    let g = graph(&src, &[("x", n)]);
    let before = exec(&g, &[("x", ramp(n))]);
    assert!(before.counters.mults >= 2 * (n * n) as u64);
    let (opt, _) = apply_dsp_patterns(&g, &all_patterns()).unwrap();
    let after = exec(&opt, &[("x", ramp(n))]);
    assert_eq!(after.counters.mults, n as u64);
    assert_eq!(after.counters.trig_calls, 0);
    let (a, b) = (before.outputs[0].values()[0], after.outputs[0].values()[0]);
    assert!((a - b).abs() <= 1e-9 * a.abs());
}

#[test]
fn every_opcode_lowers_and_matches() {
    let src = "def main(x, d) {
        var a = delay(x, 2) + slidingWindowAvg(x, 3);
        var b = firFilterResponse(a, [0.5, 0.25, 0.125]);
        var c = conv1d(b, [1, -1]);
        var re = dft1dreal(x);
        var im = dft1dimg(x);
        print(idft1d(re, im));
        print(c);
        print(lowPassFIRFilter(7, 1.1) * hammingWindow(7));
        print(lmsFilter(x, d, 0.05, 4));
        print(gain(reverse(square(x)), 3) - x / 2);
        print(sum(x));
        print(threshold(x, 0.4));
        print(runLenEncoding(quantize(x, 4, -1, 1)));
        print(downsample(upsample(x, 3), 2));
        print(sinVec(12, 3, 100) + cosVec(12, 3, 100) + rangeVec(0.5, 0.25, 12));
    }";
    let g = graph(src, &[("x", 12), ("d", 12)]);
    let inputs = [
        ("x", ramp(12)),
        ("d", ramp(12).iter().map(|v| v * 0.5).collect()),
    ];
    assert_matches_kernels(&g, &inputs);

    let opt_src = "def main(x, d) {
        var y = conv1d(x, reverse(x));
        print(dft1dreal(y)); print(dft1dimg(y));
        print(dft1dreal(x)); print(dft1dimg(x));
        var h = lowPassFIRFilter(9, 0.7) * hammingWindow(9);
        print(firFilterResponse(x, h));
        print(gain(lmsFilter(x, d, 0.05, 4), 2));
    }";
    let g = graph(opt_src, &[("x", 12), ("d", 12)]);
    let (opt, stats) = apply_dsp_patterns(&g, &all_patterns()).unwrap();
    assert_eq!(stats.fired().len(), 6);
    assert_matches_kernels(&opt, &inputs);
}

#[test]
fn runtime_errors() {
    let g = graph("def main(x) { print(1 / x); }", &[("x", 2)]);
    let prog = lower_graph(&g).unwrap();
    let err = evaluate_loop_ir(&prog, &bind(&[("x", vec![1.0, 0.0])])).unwrap_err();
    assert!(matches!(err, ExecError::DivisionByZero { .. }));

    let g = graph(
        "def main(x, d) { print(lmsFilter(x, d, 1000000, 4)); }",
        &[("x", 64), ("d", 64)],
    );
    let prog = lower_graph(&g).unwrap();
    let x: Vec<f64> = ramp(64).iter().map(|v| v * 10.0).collect();
    let err = evaluate_loop_ir(&prog, &bind(&[("x", x.clone()), ("d", x)])).unwrap_err();
    assert!(matches!(err, ExecError::Diverged { .. }), "{err:?}");

    assert_eq!(
        evaluate_loop_ir(&prog, &BTreeMap::new()).unwrap_err(),
        ExecError::MissingInput("x".into())
    );
    let err = evaluate_loop_ir(&prog, &bind(&[("x", vec![1.0]), ("d", vec![1.0])])).unwrap_err();
    assert!(matches!(
        err,
        ExecError::InputLength {
            expected: 64,
            got: 1,
            ..
        }
    ));
}

#[test]
fn static_bounds_check_catches_bad_nests() {
    let mut low = Region {
        opcode: OpCode::Reverse,
        label: "bad".into(),
        body: vec![Stmt::For {
            var: LoopVar(0),
            lb: 0,
            ub: 4.into(),
            step: 1,
            body: vec![Stmt::Load {
                dst: Temp(0),
                buf: BufferId(0),
                index: LoopVar(0) + 1,
            }],
        }],
    };
    let buffers = [Buffer {
        capacity: 4,
        init: BufferInit::Zero,
        dynamic: false,
    }];
    assert!(lower::check_bounds(&low.label, &low.body, &buffers, &mut Vec::new()).is_err());
    if let Stmt::For { body, .. } = &mut low.body[0] {
        body[0] = Stmt::Load {
            dst: Temp(0),
            buf: BufferId(0),
            index: IndexExpr::from(3) - LoopVar(0),
        };
    }
    assert!(lower::check_bounds(&low.label, &low.body, &buffers, &mut Vec::new()).is_ok());
}

#[test]
fn loop_text_is_stable() {
    let g = graph("def main(x) { print(reverse(x)); }", &[("x", 4)]);
    let text = program_to_text(&lower_graph(&g).unwrap());
    let want = "buffer b0[4] = input \"x\"\nbuffer b1[4]\n\n\
                // %1 = reverse(%0) : tensor<4>\n\
                for i0 in [0, 4) {\n  t0 = load b0[3 - i0]\n  store b1[i0] = t0\n}\n\n\
                output b1\n";
    assert_eq!(text, want);
}

#[test]
fn report_ratios() {
    let c = ExecCounters {
        loop_iterations: 10,
        mults: 4,
        ..Default::default()
    };
    let same = counters_report(&c, &c);
    assert!(same.rows().iter().all(|(_, r)| r.ratio == Some(1.0)));
    let half = counters_report(&c, &ExecCounters { mults: 2, ..c });
    assert_eq!(half.mults.ratio, Some(0.5));
    let json = serde_json::to_string(&half).unwrap();
    assert!(json.starts_with("{\"loop_iterations\":{\"before\":10,\"after\":10,\"ratio\":1.0}"));
    assert!(half.to_string().contains("mults"));
}
