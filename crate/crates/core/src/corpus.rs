//! The bundled example applications and the comment annotations programs
//! can carry.
//!
//! ```text
//! # app: EnergyOfSignal
//! # expect-patterns: 5
//! # input: x=1024
//! ```

use crate::graph::InputLengths;
use crate::rewrite::{parse_pattern_list, PatternSet};

#[derive(Debug, Clone, Copy)]
pub struct App {
    pub name: &'static str,
    pub file: &'static str,
    pub source: &'static str,
}

macro_rules! app {
    ($name:literal, $file:literal) => {
        App {
            name: $name,
            file: $file,
            source: include_str!(concat!("../apps/", $file)),
        }
    };
}

pub const APPS: [App; 7] = [
    app!("FilterDesign", "filter_design.dsp"),
    app!("LowPassFiltering", "low_pass_filtering.dsp"),
    app!("EnergyOfSignal", "energy_of_signal.dsp"),
    app!("SpectralAnalysis", "spectral_analysis.dsp"),
    app!("AudioCompression", "audio_compression.dsp"),
    app!("HearingAid", "hearing_aid.dsp"),
    app!("AudioEqualizer", "audio_equalizer.dsp"),
];

/// Finds an app by name or file name, ignoring case and the extension.
pub fn find_app(key: &str) -> Option<&'static App> {
    let key = key.trim_end_matches(".dsp").to_ascii_lowercase();
    APPS.iter()
        .find(|a| a.name.to_ascii_lowercase() == key || a.file.trim_end_matches(".dsp") == key)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Annotations {
    pub app: Option<String>,
    pub expect_patterns: Option<PatternSet>,
    /// Default input lengths, in declaration order.
    pub inputs: Vec<(String, usize)>,
}

impl Annotations {
    /// Reads `# key: value` comment lines. Unknown keys are ignored.
    pub fn parse(source: &str) -> Result<Annotations, String> {
        let mut out = Annotations::default();
        for (i, line) in source.lines().enumerate() {
            let Some(rest) = line.trim().strip_prefix('#') else {
                continue;
            };
            let Some((key, value)) = rest.split_once(':') else {
                continue;
            };
            let value = value.trim();
            let bad = |what: &str| format!("line {}: bad {what} annotation `{value}`", i + 1);
            match key.trim() {
                "app" => out.app = Some(value.to_string()),
                "expect-patterns" => {
                    out.expect_patterns =
                        Some(parse_pattern_list(value).map_err(|_| bad("pattern"))?)
                }
                "input" => {
                    let (name, len) = value.split_once('=').ok_or_else(|| bad("input"))?;
                    let len = len.trim().parse().map_err(|_| bad("input"))?;
                    out.inputs.push((name.trim().to_string(), len));
                }
                _ => {}
            }
        }
        Ok(out)
    }

    pub fn lengths(&self) -> InputLengths {
        self.inputs.iter().cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::PatternId;

    #[test]
    fn every_app_has_annotations() {
        for app in &APPS {
            let a = Annotations::parse(app.source).unwrap();
            assert_eq!(a.app.as_deref(), Some(app.name));
            assert!(a.expect_patterns.is_some(), "{}", app.name);
        }
    }

    #[test]
    fn lookup() {
        assert_eq!(
            find_app("energy_of_signal.dsp").unwrap().name,
            "EnergyOfSignal"
        );
        assert_eq!(find_app("hearingaid").unwrap().file, "hearing_aid.dsp");
        assert!(find_app("nope").is_none());
    }

    #[test]
    fn parse_annotations() {
        let a =
            Annotations::parse("# expect-patterns: 3,4\n# input: x = 8\n# a comment\n").unwrap();
        assert_eq!(
            a.expect_patterns,
            Some([PatternId::FilterYSymm, PatternId::DftConjSymm].into())
        );
        assert_eq!(a.inputs, [("x".to_string(), 8)]);
        assert!(Annotations::parse("# input: x\n").is_err());
    }
}
