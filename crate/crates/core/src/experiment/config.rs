//! Flat `key = value` experiment files.
//!
//! ```text
//! # comment
//! n = 100
//! mu = derived          # or an integer
//! mechanism = uniform
//! sweep.chi = 0.6..8:0.2
//! sweep.k = 2,3
//! ```
//!
//! Blank lines and `#` comments are ignored. Keys are the field names of the
//! run configuration; `sweep.<axis>` adds an axis (n, k, chi, p_c,
//! mechanism) whose values are a comma list or an inclusive range
//! `start..stop[:step]`. Axes are nested in file order, first outermost.
//! Later assignments to the same key override earlier ones.

use super::sweep::{ComparisonSpec, MuRule, SweepAxis, SweepSpec};
use crate::error::{Error, Result};

/// One `key = value` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`, got {line:?}", i + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(Error::Parse(format!("line {}: empty key or value", i + 1)));
        }
        out.push(Entry {
            line: i + 1,
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("{key}: cannot parse {value:?}")))
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Parse(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

fn mu_rule(value: &str) -> Result<MuRule> {
    if value == "derived" {
        Ok(MuRule::Derived)
    } else {
        num("mu", value).map(MuRule::Fixed)
    }
}

fn names(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// Values of a numeric axis: `a,b,c` or `start..stop[:step]` (inclusive).
pub fn parse_values(key: &str, value: &str) -> Result<Vec<f64>> {
    if let Some((start, rest)) = value.split_once("..") {
        let (stop, step) = match rest.split_once(':') {
            Some((stop, step)) => (stop, num::<f64>(key, step.trim())?),
            None => (rest, 1.0),
        };
        let start: f64 = num(key, start.trim())?;
        let stop: f64 = num(key, stop.trim())?;
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
            return Err(Error::Parse(format!("{key}: bad range {value:?}")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        // Snap accumulated binary error so 0.6 + 2 * 0.2 prints as 1.
        return Ok((0..count)
            .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
            .collect());
    }
    let vals = names(value)
        .iter()
        .map(|v| num(key, v))
        .collect::<Result<Vec<f64>>>()?;
    if vals.is_empty() {
        return Err(Error::Parse(format!("{key}: empty value list")));
    }
    Ok(vals)
}

fn integers(key: &str, value: &str) -> Result<Vec<usize>> {
    parse_values(key, value)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::Parse(format!("{key}: {v} is not a non-negative integer")))
            }
        })
        .collect()
}

impl SweepSpec {
    /// Applies one assignment.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => self.n = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "mu" => self.mu = mu_rule(value)?,
            "p_c" => self.p_c = num(key, value)?,
            "chi" => self.chi = num(key, value)?,
            "mechanism" => self.mechanism = value.to_string(),
            "sigma" => self.sigma = Some(num(key, value)?),
            "alpha" => self.alpha = Some(num(key, value)?),
            "receiver_mutation" => self.receiver_mutation = boolean(key, value)?,
            "max_evaluations" => self.max_evaluations = num(key, value)?,
            "replications" => self.replications = num(key, value)?,
            "seed" | "master_seed" => self.master_seed = num(key, value)?,
            _ => {
                let Some(axis) = key.strip_prefix("sweep.") else {
                    return Err(Error::Parse(format!("unknown key {key:?}")));
                };
                let axis = match axis {
                    "n" => SweepAxis::N(integers(key, value)?),
                    "k" => SweepAxis::K(integers(key, value)?),
                    "chi" => SweepAxis::Chi(parse_values(key, value)?),
                    "p_c" => SweepAxis::Pc(parse_values(key, value)?),
                    "mechanism" => SweepAxis::Mechanism(names(value)),
                    other => return Err(Error::Parse(format!("unknown sweep axis {other:?}"))),
                };
                match self.axes.iter_mut().find(|a| a.name() == axis.name()) {
                    Some(slot) => *slot = axis,
                    None => self.axes.push(axis),
                }
            }
        }
        Ok(())
    }

    /// Applies every entry of an experiment file on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for e in parse_entries(text)? {
            self.apply(&e.key, &e.value)
                .map_err(|err| Error::Parse(format!("line {}: {err}", e.line)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut spec = SweepSpec::default();
        spec.apply_text(text)?;
        Ok(spec)
    }
}

impl ComparisonSpec {
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => self.n = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "mu" => self.mu = mu_rule(value)?,
            "chi" => self.chi = num(key, value)?,
            "mechanisms" | "mechanism" => self.mechanisms = names(value),
            "island_mu" => self.island_mu = num(key, value)?,
            "baseline_chi" => {
                self.baseline_chi = match value {
                    "none" => None,
                    v => Some(num(key, v)?),
                }
            }
            "sigma" => self.sigma = Some(num(key, value)?),
            "alpha" => self.alpha = Some(num(key, value)?),
            "max_evaluations" => self.max_evaluations = num(key, value)?,
            "replications" => self.replications = num(key, value)?,
            "seed" | "master_seed" => self.master_seed = num(key, value)?,
            _ => return Err(Error::Parse(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for e in parse_entries(text)? {
            self.apply(&e.key, &e.value)
                .map_err(|err| Error::Parse(format!("line {}: {err}", e.line)))?;
        }
        Ok(())
    }
}
