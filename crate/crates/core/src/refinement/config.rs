use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{SampleSet, ScaleSchedule, DEFAULT_MERGE_TOL};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for {key}: {message}")]
    BadValue { line: usize, key: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Engine parameters. Lengths are in input units unless stated otherwise;
/// deviation thresholds are dimensionless (deviation · length scale / value scale).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementConfig {
    /// Tuple size in every round after the first.
    pub k_sharp: usize,
    /// Tuple size in the first round.
    pub k_sharp_first: usize,
    /// Largest schedule radius; `None` uses the sample diameter.
    pub delta_max: Option<f64>,
    pub ratio: f64,
    pub levels: usize,
    pub eps_star: f64,
    pub rank_tol: f64,
    /// Minimum log-log slope accepted as decay.
    pub min_slope: f64,
    /// Populated scales a stagnating profile must span before a fiber is emptied.
    pub min_empty_levels: usize,
    /// Round budget; `None` uses 2n+3.
    pub max_rounds: Option<usize>,
    pub seed: u64,
    /// Farthest-point seeded tuples per level.
    pub tuples_worst: usize,
    /// Random tuples per level.
    pub tuples_random: usize,
    /// Tikhonov weight in jet selection.
    pub lambda: f64,
    pub merge_tol: f64,
    pub max_generation: u32,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        Self {
            k_sharp: 1,
            k_sharp_first: 2,
            delta_max: None,
            ratio: 0.5,
            levels: 12,
            eps_star: 0.25,
            rank_tol: 1e-9,
            min_slope: 0.2,
            min_empty_levels: 4,
            max_rounds: None,
            seed: 0x6c61_6573_6572,
            tuples_worst: 16,
            tuples_random: 64,
            lambda: 1e-8,
            merge_tol: DEFAULT_MERGE_TOL,
            max_generation: 20,
        }
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>()
        .map_err(|e| ConfigError::BadValue { line, key: key.to_string(), message: e.to_string() })
}

fn parse_auto<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    if v.eq_ignore_ascii_case("auto") {
        Ok(None)
    } else {
        parse_num(line, key, v).map(Some)
    }
}

impl RefinementConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.k_sharp == 0 || self.k_sharp_first == 0 {
            return bad("k_sharp must be at least 1".into());
        }
        if !(self.eps_star > self.rank_tol && self.rank_tol > 0.0) {
            return bad(format!("need eps_star > rank_tol > 0, got {} and {}", self.eps_star, self.rank_tol));
        }
        if let Some(d) = self.delta_max {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("delta_max must be positive, got {d}"));
            }
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return bad(format!("ratio must lie in (0,1), got {}", self.ratio));
        }
        if self.levels < 3 {
            return bad(format!("levels must be at least 3, got {}", self.levels));
        }
        if self.min_empty_levels < 2 {
            return bad(format!("min_empty_levels must be at least 2, got {}", self.min_empty_levels));
        }
        if self.max_rounds == Some(0) {
            return bad("max_rounds must be at least 1".into());
        }
        if !(self.lambda > 0.0) {
            return bad("lambda must be positive".into());
        }
        if !(self.merge_tol >= 0.0) {
            return bad("merge_tol must be nonnegative".into());
        }
        Ok(())
    }

    /// Radius schedule for `s`, resolving `delta_max = auto` to the diameter.
    pub fn schedule(&self, s: &SampleSet) -> ScaleSchedule {
        let delta_max = self.delta_max.unwrap_or_else(|| s.length_scale());
        ScaleSchedule::new(delta_max, self.ratio, self.levels).expect("validated configuration")
    }

    pub fn max_rounds_for(&self, n: usize) -> usize {
        self.max_rounds.unwrap_or(2 * n + 3)
    }

    /// Tuple size used to produce round `round + 1` from round `round`.
    pub fn k_sharp_for(&self, round: usize) -> usize {
        if round == 0 {
            self.k_sharp_first
        } else {
            self.k_sharp
        }
    }

    /// Parses flat `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (key, v) = (key.trim(), value.trim());
            match key {
                "k_sharp" => cfg.k_sharp = parse_num(line, key, v)?,
                "k_sharp_first" => cfg.k_sharp_first = parse_num(line, key, v)?,
                "delta_max" => cfg.delta_max = parse_auto(line, key, v)?,
                "ratio" => cfg.ratio = parse_num(line, key, v)?,
                "levels" => cfg.levels = parse_num(line, key, v)?,
                "eps_star" => cfg.eps_star = parse_num(line, key, v)?,
                "rank_tol" => cfg.rank_tol = parse_num(line, key, v)?,
                "min_slope" => cfg.min_slope = parse_num(line, key, v)?,
                "min_empty_levels" => cfg.min_empty_levels = parse_num(line, key, v)?,
                "max_rounds" => cfg.max_rounds = parse_auto(line, key, v)?,
                "seed" => cfg.seed = parse_num(line, key, v)?,
                "tuples_worst" => cfg.tuples_worst = parse_num(line, key, v)?,
                "tuples_random" => cfg.tuples_random = parse_num(line, key, v)?,
                "lambda" => cfg.lambda = parse_num(line, key, v)?,
                "merge_tol" => cfg.merge_tol = parse_num(line, key, v)?,
                "max_generation" => cfg.max_generation = parse_num(line, key, v)?,
                _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Text form accepted by [`RefinementConfig::parse`].
    pub fn to_text(&self) -> String {
        let auto = |v: Option<String>| v.unwrap_or_else(|| "auto".to_string());
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("k_sharp", self.k_sharp.to_string());
        put("k_sharp_first", self.k_sharp_first.to_string());
        put("delta_max", auto(self.delta_max.map(|v| format!("{v:?}"))));
        put("ratio", format!("{:?}", self.ratio));
        put("levels", self.levels.to_string());
        put("eps_star", format!("{:?}", self.eps_star));
        put("rank_tol", format!("{:?}", self.rank_tol));
        put("min_slope", format!("{:?}", self.min_slope));
        put("min_empty_levels", self.min_empty_levels.to_string());
        put("max_rounds", auto(self.max_rounds.map(|v| v.to_string())));
        put("seed", self.seed.to_string());
        put("tuples_worst", self.tuples_worst.to_string());
        put("tuples_random", self.tuples_random.to_string());
        put("lambda", format!("{:?}", self.lambda));
        put("merge_tol", format!("{:?}", self.merge_tol));
        put("max_generation", self.max_generation.to_string());
        out
    }
}
