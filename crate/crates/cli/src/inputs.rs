//! Input bindings from `--input`, `--synth` and source annotations.

use std::collections::BTreeMap;
use std::fs;

use dspc_core::corpus::Annotations;
use dspc_core::graph::{DspGraph, InputLengths};
use dspc_core::kernels::Tensor;
use dspc_core::synth;

#[derive(Debug, Clone, PartialEq)]
pub enum Binding {
    File {
        name: String,
        data: Vec<f64>,
    },
    Synth {
        name: String,
        len: usize,
        seed: Option<u64>,
    },
}

impl Binding {
    fn name(&self) -> &str {
        match self {
            Binding::File { name, .. } | Binding::Synth { name, .. } => name,
        }
    }
}

/// `name=N` or `name=N,SEED`.
pub fn parse_synth(spec: &str) -> Result<Binding, String> {
    let bad = || format!("bad --synth `{spec}`, expected NAME=N[,SEED]");
    let (name, rest) = spec.split_once('=').ok_or_else(bad)?;
    let (len, seed) = match rest.split_once(',') {
        Some((n, s)) => (
            n,
            Some(
                s.trim()
                    .trim_start_matches("seed=")
                    .parse()
                    .map_err(|_| bad())?,
            ),
        ),
        None => (rest, None),
    };
    Ok(Binding::Synth {
        name: name.trim().to_string(),
        len: len.trim().parse().map_err(|_| bad())?,
        seed,
    })
}

fn read_file(spec: &str) -> Result<Binding, String> {
    let (name, path) = spec
        .split_once('=')
        .ok_or_else(|| format!("bad --input `{spec}`, expected NAME=FILE"))?;
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
    let data: Vec<f64> = serde_json::from_str(&text)
        .map_err(|e| format!("{path}: expected a JSON array of numbers: {e}"))?;
    Ok(Binding::File {
        name: name.trim().to_string(),
        data,
    })
}

pub struct Bindings {
    base_seed: u64,
    defaults: InputLengths,
    explicit: Vec<Binding>,
}

impl Bindings {
    pub fn new(base_seed: u64, ann: &Annotations) -> Self {
        Bindings {
            base_seed,
            defaults: ann.lengths(),
            explicit: Vec::new(),
        }
    }

    pub fn add_synth(&mut self, spec: &str) -> Result<(), String> {
        self.push(parse_synth(spec)?);
        Ok(())
    }

    pub fn add_file(&mut self, spec: &str) -> Result<(), String> {
        self.push(read_file(spec)?);
        Ok(())
    }

    fn push(&mut self, b: Binding) {
        self.explicit.retain(|old| old.name() != b.name());
        self.explicit.push(b);
    }

    fn find(&self, name: &str) -> Option<&Binding> {
        self.explicit.iter().find(|b| b.name() == name)
    }

    /// Length of every input of `graph`; explicit bindings win over
    /// annotated defaults.
    pub fn lengths_for(&self, graph: &DspGraph) -> Result<InputLengths, String> {
        let mut out = InputLengths::new();
        for (name, _) in graph.inputs() {
            let len = match self.find(&name) {
                Some(Binding::File { data, .. }) => data.len(),
                Some(Binding::Synth { len, .. }) => *len,
                None => *self.defaults.get(&name).ok_or_else(|| {
                    format!("input `{name}` is not bound; use --input or --synth")
                })?,
            };
            out.insert(name, len);
        }
        if let Some(b) = self.explicit.iter().find(|b| !out.contains_key(b.name())) {
            return Err(format!("the program has no input `{}`", b.name()));
        }
        Ok(out)
    }

    /// Input `i` without an explicit seed gets `base_seed + i`.
    pub fn tensors(&self, graph: &DspGraph) -> Result<BTreeMap<String, Tensor>, String> {
        let lengths = self.lengths_for(graph)?;
        let mut out = BTreeMap::new();
        for (i, (name, _)) in graph.inputs().into_iter().enumerate() {
            let data = match self.find(&name) {
                Some(Binding::File { data, .. }) => data.clone(),
                Some(Binding::Synth {
                    len, seed: Some(s), ..
                }) => synth::noise(*len, *s),
                _ => synth::noise(lengths[&name], self.base_seed.wrapping_add(i as u64)),
            };
            out.insert(name, Tensor::new(data));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synth_specs() {
        assert_eq!(
            parse_synth("x=16,7").unwrap(),
            Binding::Synth {
                name: "x".into(),
                len: 16,
                seed: Some(7)
            }
        );
        assert_eq!(
            parse_synth("x=16,seed=7").unwrap(),
            parse_synth("x = 16, 7").unwrap()
        );
        assert!(matches!(
            parse_synth("x=16").unwrap(),
            Binding::Synth { seed: None, .. }
        ));
        assert!(parse_synth("x").is_err());
        assert!(parse_synth("x=a").is_err());
    }
}
