//! Builtin experiment configs, shipped as files under `presets/`.

use super::ExperimentConfig;
use crate::error::{Error, Result};

/// `(name, config text)`. The full-scale `figure1-*` presets are slow.
pub const PRESETS: &[(&str, &str)] = &[
    ("action-drift", include_str!("../../../../presets/action-drift.cfg")),
    ("bea-toy", include_str!("../../../../presets/bea-toy.cfg")),
    ("bnf-toy", include_str!("../../../../presets/bnf-toy.cfg")),
    ("energy-drift", include_str!("../../../../presets/energy-drift.cfg")),
    ("figure1-A-scaled", include_str!("../../../../presets/figure1-A-scaled.cfg")),
    ("figure1-A", include_str!("../../../../presets/figure1-A.cfg")),
    ("figure1-B-scaled", include_str!("../../../../presets/figure1-B-scaled.cfg")),
    ("figure1-B", include_str!("../../../../presets/figure1-B.cfg")),
    ("figure1-C-scaled", include_str!("../../../../presets/figure1-C-scaled.cfg")),
    ("figure1-C", include_str!("../../../../presets/figure1-C.cfg")),
    ("figure1-D-scaled", include_str!("../../../../presets/figure1-D-scaled.cfg")),
    ("figure1-D", include_str!("../../../../presets/figure1-D.cfg")),
    ("zero-g", include_str!("../../../../presets/zero-g.cfg")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("unknown preset '{name}'")))?;
    ExperimentConfig::parse(text)
}
