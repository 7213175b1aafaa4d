//! TOML run configuration. Values resolve as flag > file > default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use prosodex::corpus::synth::SynthConfig;
use prosodex::learning::{ClassifierConfig, DEFAULT_BINS};
use prosodex::timeline::{DurationTable, RhythmPunctSet};
use prosodex::windowing::{WindowingParams, STANDARD_DELTA, STANDARD_L0};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const CONFIG_ENV: &str = "PROSODEX_CONFIG";

/// Overrides applied on top of the default duration table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DurationOverrides {
    pub symbols: BTreeMap<String, u64>,
    pub line_break: Option<u64>,
    pub unknown_word: Option<u64>,
    pub gap: Option<u64>,
    pub other_punctuation: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// CMU-format lexicon; the bundled fixture lexicon when unset.
    pub lexicon_path: Option<PathBuf>,
    pub corpus_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Worker threads; 0 means one per core.
    pub jobs: usize,
    pub l0: Vec<usize>,
    pub delta: Vec<f64>,
    pub rhythm_punct: Vec<String>,
    pub durations: DurationOverrides,
    pub nmi_bins: usize,
    pub classifiers: Vec<ClassifierConfig>,
    pub nf_min: usize,
    pub nf_max: usize,
    pub tau: f64,
    pub layout_iterations: usize,
    pub synth_per_class: usize,
    pub synth: Option<SynthConfig>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            lexicon_path: None,
            corpus_dir: None,
            out_dir: PathBuf::from("out"),
            seed: 0,
            jobs: 0,
            l0: STANDARD_L0.to_vec(),
            delta: STANDARD_DELTA.to_vec(),
            rhythm_punct: RhythmPunctSet::default().symbols.into_iter().collect(),
            durations: DurationOverrides::default(),
            nmi_bins: DEFAULT_BINS,
            classifiers: ClassifierConfig::all_defaults(),
            nf_min: *prosodex::learning::NF_RANGE.start(),
            nf_max: *prosodex::learning::NF_RANGE.end(),
            tau: 0.5,
            layout_iterations: 500,
            synth_per_class: 40,
            synth: None,
        }
    }
}

impl Config {
    /// Reads `path` (already resolved from `--config` or `PROSODEX_CONFIG`), or defaults.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn grid(&self) -> Result<Vec<WindowingParams<f64>>, CliError> {
        WindowingParams::grid(&self.l0, &self.delta).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn durations(&self) -> Result<DurationTable, CliError> {
        let mut table = DurationTable::default();
        let o = &self.durations;
        table.symbols.extend(o.symbols.iter().map(|(k, &v)| (k.clone(), v)));
        table.line_break = o.line_break.unwrap_or(table.line_break);
        table.unknown_word = o.unknown_word.unwrap_or(table.unknown_word);
        table.gap = o.gap.unwrap_or(table.gap);
        table.other_punctuation = o.other_punctuation.unwrap_or(table.other_punctuation);
        table.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(table)
    }

    pub fn rhythm_punct(&self) -> RhythmPunctSet {
        RhythmPunctSet {
            symbols: self.rhythm_punct.iter().cloned().collect(),
        }
    }

    pub fn nf_values(&self) -> Result<Vec<usize>, CliError> {
        if self.nf_min == 0 || self.nf_min > self.nf_max {
            return Err(CliError::Usage(format!(
                "invalid n_f range {}..={}",
                self.nf_min, self.nf_max
            )));
        }
        Ok((self.nf_min..=self.nf_max).collect())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.grid()?;
        self.durations()?;
        self.nf_values()?;
        if self.nmi_bins < 2 {
            return Err(CliError::Usage("nmi_bins must be at least 2".into()));
        }
        if self.classifiers.is_empty() {
            return Err(CliError::Usage("at least one classifier is required".into()));
        }
        for c in &self.classifiers {
            c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        }
        if !(-1.0..=1.0).contains(&self.tau) {
            return Err(CliError::Usage(format!("tau must lie in [-1, 1], got {}", self.tau)));
        }
        if let Some(s) = &self.synth {
            s.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        }
        Ok(())
    }
}
