use dspc_core::corpus::{Annotations, APPS};
use dspc_core::frontend::{ast_to_text, parse_source};
use dspc_core::graph::{graph_to_text, parse_graph_text, verify_graph};
use dspc_core::kernels::{eval_graph, printed_values};
use dspc_core::lowering::{evaluate_loop_ir, lower_graph};
use dspc_core::pipeline::{compile, max_rel_deviation, synth_inputs};
use dspc_core::rewrite::{all_patterns, apply_dsp_patterns, PatternId};

#[test]
fn sources_round_trip_through_ast_text() {
    for app in &APPS {
        let ast = parse_source(app.source).unwrap();
        let text = ast_to_text(&ast);
        let again = parse_source(&text).unwrap();
        assert!(ast.same_shape(&again), "{}", app.name);
        assert_eq!(ast_to_text(&again), text, "{}", app.name);
    }
}

#[test]
fn graphs_round_trip_through_text() {
    for app in &APPS {
        let lengths = Annotations::parse(app.source).unwrap().lengths();
        let c = compile(app.source, &lengths, Some(&all_patterns())).unwrap();
        for g in [&c.graph, &c.optimized] {
            let text = graph_to_text(g);
            let parsed = parse_graph_text(&text).unwrap();
            assert_eq!(&parsed, g, "{}", app.name);
            assert!(verify_graph(&parsed).is_empty(), "{}", app.name);
        }
    }
}

#[test]
fn rewriting_preserves_printed_values() {
    for app in &APPS {
        let lengths = Annotations::parse(app.source).unwrap().lengths();
        let c = compile(app.source, &lengths, None).unwrap();
        let (opt, stats) = apply_dsp_patterns(&c.graph, &all_patterns()).unwrap();
        // The fused LMS recursion is checked against its own oracle elsewhere.
        if stats.fired().contains(&PatternId::LmsGainFusion) {
            continue;
        }
        for seed in 0..20 {
            let inputs = synth_inputs(&c.graph, &lengths, seed);
            let before = printed_values(&c.graph, &eval_graph(&c.graph, &inputs).unwrap());
            let after = printed_values(&opt, &eval_graph(&opt, &inputs).unwrap());
            let d = max_rel_deviation(&before, &after);
            assert!(d <= 1e-9, "{} seed {seed}: {d:e}", app.name);
        }
    }
}

#[test]
fn loop_programs_agree_with_kernels() {
    for app in &APPS {
        let lengths = Annotations::parse(app.source).unwrap().lengths();
        let c = compile(app.source, &lengths, Some(&all_patterns())).unwrap();
        for g in [&c.graph, &c.optimized] {
            let program = lower_graph(g).unwrap();
            for seed in 0..10 {
                let inputs = synth_inputs(g, &lengths, seed);
                let want = printed_values(g, &eval_graph(g, &inputs).unwrap());
                let got = evaluate_loop_ir(&program, &inputs).unwrap().outputs;
                let d = max_rel_deviation(&want, &got);
                assert!(d <= 1e-9, "{} seed {seed}: {d:e}", app.name);
            }
        }
    }
}

#[test]
fn counters_are_deterministic() {
    for app in &APPS {
        let lengths = Annotations::parse(app.source).unwrap().lengths();
        let c = compile(app.source, &lengths, Some(&all_patterns())).unwrap();
        let inputs = synth_inputs(&c.graph, &lengths, 3);
        let a = c.run(&inputs).unwrap();
        let b = c.run(&inputs).unwrap();
        assert_eq!(
            a.counters.without_time(),
            b.counters.without_time(),
            "{}",
            app.name
        );
        assert_eq!(a.outputs, b.outputs);
        assert!(!a.outputs.is_empty());
    }
}
