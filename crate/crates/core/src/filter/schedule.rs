//! Step-indexed optimization policy: feature level, render resolution,
//! candidate count and noise magnitude.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Vertical translation noise relative to the lateral axes.
pub const VERTICAL_DAMPING: f64 = 0.1;

/// Which part of the feature hierarchy a step uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LevelStage {
    Coarse,
    Mid,
    Fine,
}

impl LevelStage {
    /// 1-based pyramid level for a pyramid with `levels` levels. Fine is
    /// level 1, coarse the last level, mid the one in between.
    pub fn level_index(self, levels: usize) -> usize {
        match self {
            LevelStage::Fine => 1,
            LevelStage::Coarse => levels.max(1),
            LevelStage::Mid => ((levels + 2) / 2).clamp(1, levels.max(1)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LevelStage::Coarse => "coarse",
            LevelStage::Mid => "mid",
            LevelStage::Fine => "fine",
        }
    }
}

impl fmt::Display for LevelStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPlan {
    pub step: usize,
    pub level: LevelStage,
    /// Render height in pixels; width follows the camera aspect ratio.
    pub res_height: u32,
    pub n_candidates: usize,
    /// Per-axis standard deviation (x, y vertical, z), meters.
    pub trans_sigma: Vector3<f64>,
    /// Rotation half-range, degrees.
    pub rot_mag: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub total_steps: usize,
    /// Noise reset and beam resampling period.
    pub resample_interval: usize,
    /// First step using the mid level.
    pub n1: usize,
    /// Number of final steps using the fine level.
    pub fine_tail: usize,
    pub beams: usize,
    pub candidates_start: usize,
    pub candidates_end: usize,
    pub res_low: u32,
    pub res_high: u32,
    /// Initial lateral translation noise, meters.
    pub trans_sigma: f64,
    /// Initial rotation noise, degrees.
    pub rot_mag: f64,
    pub seed: u64,
}

/// Named schedule templates for the three use cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Coarse, then mid, then fine over 80 steps.
    Standalone,
    /// Coarse and mid only, as a front end to a more accurate localizer.
    Preprocess,
    /// Five fine-level steps polishing an already accurate pose.
    Postprocess,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Standalone => "standalone",
            Preset::Preprocess => "preprocess",
            Preset::Postprocess => "postprocess",
        }
    }

    /// Schedule for a scene whose bounding-box diagonal is `scene_diagonal` meters.
    pub fn schedule(self, scene_diagonal: f64) -> Schedule {
        let base = Schedule {
            total_steps: 80,
            resample_interval: 20,
            n1: 30,
            fine_tail: 10,
            beams: 3,
            candidates_start: 50,
            candidates_end: 20,
            res_low: 64,
            res_high: 128,
            trans_sigma: 0.015 * scene_diagonal,
            rot_mag: 12.0,
            seed: 0,
        };
        match self {
            Preset::Standalone => base,
            Preset::Preprocess => Schedule {
                total_steps: 40,
                fine_tail: 0,
                ..base
            },
            Preset::Postprocess => Schedule {
                total_steps: 5,
                n1: 0,
                fine_tail: 5,
                candidates_start: 20,
                candidates_end: 20,
                res_low: base.res_high,
                trans_sigma: 0.002 * scene_diagonal,
                rot_mag: 0.2,
                ..base
            },
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standalone" => Ok(Preset::Standalone),
            "preprocess" => Ok(Preset::Preprocess),
            "postprocess" => Ok(Preset::Postprocess),
            _ => Err(Error::config(
                "preset",
                format!("unknown preset `{s}` (valid: standalone, preprocess, postprocess)"),
            )),
        }
    }
}

pub const CONFIG_KEYS: [&str; 12] = [
    "total_steps",
    "resample_interval",
    "n1",
    "fine_tail",
    "beams",
    "candidates_start",
    "candidates_end",
    "res_low",
    "res_high",
    "trans_sigma",
    "rot_mag",
    "seed",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("invalid value `{value}`")))
}

impl Schedule {
    /// First step using the fine level.
    pub fn n2(&self) -> usize {
        self.total_steps.saturating_sub(self.fine_tail)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::config(key, msg));
        if self.total_steps == 0 {
            return bad("total_steps", "must be at least 1".into());
        }
        if self.resample_interval == 0 {
            return bad("resample_interval", "must be at least 1".into());
        }
        if self.fine_tail > self.total_steps {
            return bad(
                "fine_tail",
                format!("{} exceeds total_steps {}", self.fine_tail, self.total_steps),
            );
        }
        if self.n1 > self.n2() {
            return bad(
                "n1",
                format!("{} is past the start of the fine tail (step {})", self.n1, self.n2()),
            );
        }
        if self.beams == 0 {
            return bad("beams", "must be at least 1".into());
        }
        if self.candidates_start == 0 {
            return bad("candidates_start", "must be at least 1".into());
        }
        if self.candidates_end == 0 {
            return bad("candidates_end", "must be at least 1".into());
        }
        if self.res_low < 32 {
            return bad("res_low", format!("{} is below the 32 pixel minimum", self.res_low));
        }
        if self.res_high < 32 {
            return bad("res_high", format!("{} is below the 32 pixel minimum", self.res_high));
        }
        if !(self.trans_sigma >= 0.0 && self.trans_sigma.is_finite()) {
            return bad("trans_sigma", format!("must be finite and >= 0, got {}", self.trans_sigma));
        }
        if !(self.rot_mag >= 0.0 && self.rot_mag.is_finite()) {
            return bad("rot_mag", format!("must be finite and >= 0, got {}", self.rot_mag));
        }
        Ok(())
    }

    pub fn level_at(&self, step: usize) -> LevelStage {
        if step < self.n1 {
            LevelStage::Coarse
        } else if step < self.n2() {
            LevelStage::Mid
        } else {
            LevelStage::Fine
        }
    }

    /// Fraction of the run completed at `step`, 0 at the first step and 1 at the last.
    fn progress(&self, step: usize) -> f64 {
        if self.total_steps <= 1 {
            0.0
        } else {
            step as f64 / (self.total_steps - 1) as f64
        }
    }

    /// Noise multiplier: decays linearly from 1 and resets every `resample_interval` steps.
    pub fn noise_factor(&self, step: usize) -> f64 {
        let phase = step % self.resample_interval;
        1.0 - phase as f64 / self.resample_interval as f64
    }

    pub fn is_resample_step(&self, step: usize) -> bool {
        step > 0 && step % self.resample_interval == 0
    }

    pub fn schedule_at(&self, step: usize) -> Result<StepPlan> {
        if step >= self.total_steps {
            return Err(Error::InvalidArgument(format!(
                "step {step} out of range for a {}-step schedule",
                self.total_steps
            )));
        }
        let t = self.progress(step);
        let lerp = |a: f64, b: f64| a + (b - a) * t;
        let n_candidates = lerp(self.candidates_start as f64, self.candidates_end as f64)
            .round()
            .max(1.0) as usize;
        // multiples of 8 keep the pyramid strides aligned and limit re-extraction
        let raw_height = lerp(self.res_low as f64, self.res_high as f64);
        let res_height = ((raw_height / 8.0).round() * 8.0).max(32.0) as u32;
        let factor = self.noise_factor(step);
        let lateral = self.trans_sigma * factor;
        Ok(StepPlan {
            step,
            level: self.level_at(step),
            res_height,
            n_candidates,
            trans_sigma: Vector3::new(lateral, lateral * VERTICAL_DAMPING, lateral),
            rot_mag: self.rot_mag * factor,
        })
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "total_steps" => self.total_steps = parse_value(key, value)?,
            "resample_interval" => self.resample_interval = parse_value(key, value)?,
            "n1" => self.n1 = parse_value(key, value)?,
            "fine_tail" => self.fine_tail = parse_value(key, value)?,
            "beams" => self.beams = parse_value(key, value)?,
            "candidates_start" => self.candidates_start = parse_value(key, value)?,
            "candidates_end" => self.candidates_end = parse_value(key, value)?,
            "res_low" => self.res_low = parse_value(key, value)?,
            "res_high" => self.res_high = parse_value(key, value)?,
            "trans_sigma" => self.trans_sigma = parse_value(key, value)?,
            "rot_mag" => self.rot_mag = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            _ => {
                return Err(Error::config(
                    key,
                    format!("unknown key (valid keys: {})", CONFIG_KEYS.join(", ")),
                ))
            }
        }
        Ok(())
    }

    /// Applies a `key=value` text file on top of `self`. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn apply_config(&mut self, text: &str, path: &Path) -> Result<()> {
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, idx + 1, format!("expected key=value, got `{line}`")))?;
            self.set(key.trim(), value.trim())?;
        }
        self.validate()
    }

    pub fn load_config(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_config(&text, path)
    }

    /// All keys as `key=value` pairs separated by spaces, in config-key order.
    pub fn to_config_line(&self) -> String {
        format!(
            "total_steps={} resample_interval={} n1={} fine_tail={} beams={} candidates_start={} \
             candidates_end={} res_low={} res_high={} trans_sigma={} rot_mag={} seed={}",
            self.total_steps,
            self.resample_interval,
            self.n1,
            self.fine_tail,
            self.beams,
            self.candidates_start,
            self.candidates_end,
            self.res_low,
            self.res_high,
            self.trans_sigma,
            self.rot_mag,
            self.seed
        )
    }
}
