//! Run configuration: a UTF-8 key=value file, one setting per line.
//!
//! ```text
//! seeds = fixtures/seeds.jsonl
//! output_dir = runs/demo
//! modes = meta, init, aug
//! model_id = gpt-3.5-turbo
//! temperature_s5 = 0.7
//! soft_fail_search = false
//! ```
//!
//! Relative paths are resolved against the config file's directory. Unset
//! keys fall back to the bundled assets and the documented defaults.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::domain::RunMode;
use crate::metrics::{OutlineMetricConfig, SelfBleuUnit, TokenScheme, TokenizerConfig};
use crate::pipeline::StageTemperatures;

/// Where the coherence reference corpus comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherenceCorpus {
    /// Seed bodies plus every retrieved document of the run.
    Run,
    /// A plain-text file, one document per line.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seeds: PathBuf,
    pub output_dir: PathBuf,
    pub modes: Vec<RunMode>,
    pub model_id: String,
    pub judge_model_id: String,
    pub templates_manifest: PathBuf,
    pub fewshot: PathBuf,
    pub checklist: PathBuf,
    pub temperatures: StageTemperatures,
    pub max_tokens: u32,
    pub judge_max_tokens: u32,
    pub soft_fail_search: bool,
    /// Seed-level worker pool width.
    pub concurrency: usize,
    /// Section-drafting fan-out inside one run; 1 = sequential.
    pub section_concurrency: usize,
    /// Concurrent judge calls (writing aspects and NLI pairs).
    pub judge_concurrency: usize,
    pub cache_dir: Option<PathBuf>,
    pub metrics: OutlineMetricConfig,
    pub coherence_corpus: CoherenceCorpus,
    /// Alignment aborts when more than this fraction of human rows fail to
    /// match a trace.
    pub align_max_unmatched: f64,
    pub ordinal_offset: i64,
}

impl ExperimentConfig {
    /// A config pointing at the bundled assets; callers set seeds/output.
    pub fn with_defaults(seeds: PathBuf, output_dir: PathBuf) -> Self {
        let assets = crate::default_assets_dir();
        ExperimentConfig {
            seeds,
            output_dir,
            modes: RunMode::ALL.to_vec(),
            model_id: "gpt-3.5-turbo".into(),
            judge_model_id: "gpt-4-turbo".into(),
            templates_manifest: assets.join("templates/manifest.txt"),
            fewshot: assets.join("templates/fewshot.txt"),
            checklist: assets.join("checklist.txt"),
            temperatures: StageTemperatures::default(),
            max_tokens: 1024,
            judge_max_tokens: 1024,
            soft_fail_search: false,
            concurrency: 4,
            section_concurrency: 1,
            judge_concurrency: 4,
            cache_dir: None,
            metrics: OutlineMetricConfig::default(),
            coherence_corpus: CoherenceCorpus::Run,
            align_max_unmatched: 0.5,
            ordinal_offset: 0,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(HarnessError::io(format!(
            "reading config {}",
            path.display()
        )))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        ExperimentConfig::parse(&text, base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, HarnessError> {
        let mut seeds: Option<PathBuf> = None;
        let mut output_dir: Option<PathBuf> = None;
        let mut config: Option<ExperimentConfig> = None;
        let mut pending: Vec<(usize, String, String)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(HarnessError::Config {
                line: line_no,
                reason: "expected `key = value`".into(),
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            match key.as_str() {
                "seeds" => seeds = Some(resolve(base_dir, &value)),
                "output_dir" => output_dir = Some(resolve(base_dir, &value)),
                _ => pending.push((line_no, key, value)),
            }
        }

        let seeds = seeds.ok_or(HarnessError::Config {
            line: 0,
            reason: "missing required key `seeds`".into(),
        })?;
        let output_dir = output_dir.ok_or(HarnessError::Config {
            line: 0,
            reason: "missing required key `output_dir`".into(),
        })?;
        let cfg = config.get_or_insert_with(|| ExperimentConfig::with_defaults(seeds, output_dir));

        for (line, key, value) in pending {
            cfg.apply(&key, &value, base_dir)
                .map_err(|reason| HarnessError::Config { line, reason })?;
        }
        if cfg.modes.is_empty() {
            return Err(HarnessError::Config {
                line: 0,
                reason: "modes must not be empty".into(),
            });
        }
        Ok(config.expect("initialized above"))
    }

    fn apply(&mut self, key: &str, value: &str, base: &Path) -> Result<(), String> {
        match key {
            "modes" => {
                let modes = value
                    .split(',')
                    .map(|m| m.trim().parse::<RunMode>())
                    .collect::<Result<Vec<_>, _>>()?;
                let mut ordered = RunMode::ALL.to_vec();
                ordered.retain(|m| modes.contains(m));
                self.modes = ordered;
            }
            "model_id" => self.model_id = value.to_string(),
            "judge_model_id" => self.judge_model_id = value.to_string(),
            "templates" => self.templates_manifest = resolve(base, value),
            "fewshot" => self.fewshot = resolve(base, value),
            "checklist" => self.checklist = resolve(base, value),
            "temperature_s1" => self.temperatures.s1 = parse_num(key, value)?,
            "temperature_s2" => self.temperatures.s2 = parse_num(key, value)?,
            "temperature_s3" => self.temperatures.s3 = parse_num(key, value)?,
            "temperature_s4" => self.temperatures.s4 = parse_num(key, value)?,
            "temperature_s5" => self.temperatures.s5 = parse_num(key, value)?,
            "temperature_eval" => self.temperatures.eval = parse_num(key, value)?,
            "max_tokens" => self.max_tokens = parse_num(key, value)?,
            "judge_max_tokens" => self.judge_max_tokens = parse_num(key, value)?,
            "soft_fail_search" => self.soft_fail_search = parse_bool(key, value)?,
            "concurrency" => self.concurrency = parse_nonzero(key, value)?,
            "section_concurrency" => self.section_concurrency = parse_nonzero(key, value)?,
            "judge_concurrency" => self.judge_concurrency = parse_nonzero(key, value)?,
            "cache_dir" => self.cache_dir = Some(resolve(base, value)),
            "tokenizer" => {
                self.metrics.tokenizer.scheme = match value {
                    "unicode_words" => TokenScheme::UnicodeWords,
                    "whitespace" => TokenScheme::Whitespace,
                    other => match other.strip_prefix("char_ngram:") {
                        Some(n) => TokenScheme::CharacterNgram(
                            n.parse::<usize>()
                                .ok()
                                .filter(|n| *n >= 1)
                                .ok_or_else(|| format!("bad char_ngram size {n:?}"))?,
                        ),
                        None => return Err(format!("unknown tokenizer {other:?}")),
                    },
                };
            }
            "lowercase" => self.metrics.tokenizer.lowercase = parse_bool(key, value)?,
            "stopwords" => {
                let path = resolve(base, value);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| format!("cannot read stopwords {}: {e}", path.display()))?;
                self.metrics.tokenizer.stopwords = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(str::to_string)
                    .collect::<BTreeSet<_>>();
            }
            "window" => self.metrics.window = parse_nonzero(key, value)?,
            "top_k" => self.metrics.top_k = parse_nonzero(key, value)?,
            "bleu_max_n" => self.metrics.bleu_max_n = parse_nonzero(key, value)?,
            "epsilon" => self.metrics.epsilon = parse_num(key, value)?,
            "bleu_epsilon" => self.metrics.bleu_epsilon = parse_num(key, value)?,
            "self_bleu_unit" => {
                self.metrics.self_bleu_unit = match value {
                    "block" => SelfBleuUnit::Block,
                    "header" => SelfBleuUnit::Header,
                    other => return Err(format!("unknown self_bleu_unit {other:?}")),
                };
            }
            "coherence_corpus" => {
                self.coherence_corpus = if value == "run" {
                    CoherenceCorpus::Run
                } else {
                    CoherenceCorpus::File(resolve(base, value))
                };
            }
            "align_max_unmatched" => self.align_max_unmatched = parse_num(key, value)?,
            "ordinal_offset" => self.ordinal_offset = parse_num(key, value)?,
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    /// The tokenizer shared by the metric operations.
    pub fn tokenizer(&self) -> &TokenizerConfig {
        &self.metrics.tokenizer
    }
}

fn resolve(base: &Path, value: &str) -> PathBuf {
    let path = Path::new(value);
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse::<T>()
        .map_err(|_| format!("{key}: cannot parse {value:?}"))
}

fn parse_nonzero(key: &str, value: &str) -> Result<usize, String> {
    let n: usize = parse_num(key, value)?;
    if n == 0 {
        return Err(format!("{key} must be at least 1"));
    }
    Ok(n)
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("{key}: expected a boolean, got {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg =
            ExperimentConfig::parse("seeds = s.jsonl\noutput_dir = out\n", Path::new("/base"))
                .unwrap();
        assert_eq!(cfg.seeds, Path::new("/base/s.jsonl"));
        assert_eq!(cfg.modes, RunMode::ALL.to_vec());
        assert_eq!(cfg.metrics.window, 10);
        assert_eq!(cfg.temperatures.eval, 0.0);
    }

    #[test]
    fn keys_override_defaults() {
        let text = "seeds = s.jsonl\noutput_dir = out\nmodes = aug, meta\nwindow = 5\nsoft_fail_search = true\ntokenizer = char_ngram:2\n";
        let cfg = ExperimentConfig::parse(text, Path::new(".")).unwrap();
        // mode order is normalized to meta < init < aug
        assert_eq!(cfg.modes, vec![RunMode::Meta, RunMode::Aug]);
        assert_eq!(cfg.metrics.window, 5);
        assert!(cfg.soft_fail_search);
        assert_eq!(cfg.metrics.tokenizer.scheme, TokenScheme::CharacterNgram(2));
    }

    #[test]
    fn unknown_key_is_an_error_with_line() {
        let err =
            ExperimentConfig::parse("seeds = s\noutput_dir = o\nnot_a_key = 3\n", Path::new("."))
                .unwrap_err();
        assert!(matches!(err, HarnessError::Config { line: 3, .. }));
    }

    #[test]
    fn missing_required_keys_rejected() {
        assert!(ExperimentConfig::parse("output_dir = o\n", Path::new(".")).is_err());
        assert!(ExperimentConfig::parse("seeds = s\n", Path::new(".")).is_err());
    }

    #[test]
    fn snapshot_round_trips_through_json() {
        let cfg = ExperimentConfig::with_defaults("s.jsonl".into(), "out".into());
        let json = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }
}
