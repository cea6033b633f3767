//! Flat `key = value` parameter blocks and named presets.
//!
//! Blank lines and `#` comments are ignored. Keys for the piecewise family are
//! `lambda sigma c2 d1 d5 a1 b1 mu1 mu2 mu3 mu4`; for the Hénon map
//! `alpha beta R S`. Setting `a1` without `b1` implies `b1 = -a1`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::export::fmt17;
use crate::maps::{GrhtMapParams, HenonMapParams};

pub const GRHT_KEYS: [&str; 11] = ["lambda", "sigma", "c2", "d1", "d5", "a1", "b1", "mu1", "mu2", "mu3", "mu4"];
pub const HENON_KEYS: [&str; 4] = ["alpha", "beta", "R", "S"];

/// An ordered set of numeric assignments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamBlock {
    values: BTreeMap<String, f64>,
}

fn canonical_key(key: &str) -> Option<&'static str> {
    match key {
        "r" | "R" => Some("R"),
        "s" | "S" => Some("S"),
        _ => GRHT_KEYS.iter().chain(HENON_KEYS.iter()).copied().find(|k| *k == key),
    }
}

impl ParamBlock {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses a whole text block.
    pub fn parse(text: &str) -> Result<Self> {
        let mut block = Self::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            block.set_assignment(line).map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?;
        }
        Ok(block)
    }

    /// Applies one `key=value` assignment.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{assignment}`")))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("`{}` is not a number", v.trim())))?;
        self.set(k.trim(), value)
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let k = canonical_key(key).ok_or_else(|| Error::Parse(format!("unknown parameter `{key}`")))?;
        if !value.is_finite() {
            return Err(Error::Parse(format!("parameter `{key}` must be finite")));
        }
        self.values.insert(k.to_string(), value);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        canonical_key(key).and_then(|k| self.values.get(k).copied())
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Later assignments win.
    pub fn merge(&mut self, other: &ParamBlock) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), *v);
        }
    }

    pub fn has_henon_keys(&self) -> bool {
        HENON_KEYS.iter().any(|k| self.values.contains_key(*k))
    }

    /// Overrides fields of `base` with the values present in this block.
    pub fn apply_grht(&self, base: GrhtMapParams) -> GrhtMapParams {
        let mut p = base;
        if let Some(a1) = self.get("a1") {
            p = p.with_a1(a1);
        }
        let slots: [(&str, &mut f64); 10] = [
            ("lambda", &mut p.lambda),
            ("sigma", &mut p.sigma),
            ("c2", &mut p.c2),
            ("d1", &mut p.d1),
            ("d5", &mut p.d5),
            ("b1", &mut p.b1),
            ("mu1", &mut p.mu1),
            ("mu2", &mut p.mu2),
            ("mu3", &mut p.mu3),
            ("mu4", &mut p.mu4),
        ];
        for (k, slot) in slots {
            if let Some(v) = self.get(k) {
                *slot = v;
            }
        }
        p
    }

    pub fn apply_henon(&self, base: HenonMapParams) -> HenonMapParams {
        HenonMapParams {
            alpha: self.get("alpha").unwrap_or(base.alpha),
            beta: self.get("beta").unwrap_or(base.beta),
            r: self.get("R").unwrap_or(base.r),
            s: self.get("S").unwrap_or(base.s),
        }
    }

    pub fn to_text(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {}\n", fmt17(*v))).collect()
    }
}

impl From<&GrhtMapParams> for ParamBlock {
    fn from(p: &GrhtMapParams) -> Self {
        let vals = [p.lambda, p.sigma, p.c2, p.d1, p.d5, p.a1, p.b1, p.mu1, p.mu2, p.mu3, p.mu4];
        let mut b = ParamBlock::new();
        for (k, v) in GRHT_KEYS.iter().zip(vals) {
            b.values.insert((*k).to_string(), v);
        }
        b
    }
}

impl From<&HenonMapParams> for ParamBlock {
    fn from(p: &HenonMapParams) -> Self {
        let mut b = ParamBlock::new();
        for (k, v) in HENON_KEYS.iter().zip([p.alpha, p.beta, p.r, p.s]) {
            b.values.insert((*k).to_string(), v);
        }
        b
    }
}

/// A named starting point for either map family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    Grht(GrhtMapParams),
    Henon(HenonMapParams),
}

pub const PRESET_NAMES: [&str; 8] =
    ["param1", "param2", "param3", "param4", "toy-unfold", "critical", "ghm-tangle", "ghm-neutral"];

/// Looks up a preset by name.
pub fn preset(name: &str) -> Result<Preset> {
    Ok(match name {
        "param1" => Preset::Grht(GrhtMapParams::param1()),
        "param2" => Preset::Grht(GrhtMapParams::param2()),
        "param3" => Preset::Grht(GrhtMapParams::param3()),
        "param4" => Preset::Grht(GrhtMapParams::param4()),
        "toy-unfold" => Preset::Grht(GrhtMapParams::toy_unfold()),
        "critical" => Preset::Grht(GrhtMapParams::critical_example()),
        "ghm-tangle" => Preset::Henon(HenonMapParams::new(-0.4, 0.8, 0.08, -0.125)),
        "ghm-neutral" => Preset::Henon(HenonMapParams::new(0.8145, 0.8055, 0.1170465574, 0.3)),
        _ => {
            return Err(Error::Parse(format!(
                "unknown preset `{name}` (expected one of {})",
                PRESET_NAMES.join(", ")
            )))
        }
    })
}
