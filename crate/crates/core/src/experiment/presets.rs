//! Built-in desk-scale experiments: the standard sweeps at reduced
//! n and 30 replications.

use std::path::Path;

use super::sweep::{
    run_mechanism_comparison, run_sweep, ComparisonSpec, MuRule, SweepAxis, SweepOutput, SweepSpec,
    DEFAULT_SWEEP_BUDGET,
};
use crate::diversity::RULE_IDS;
use crate::error::{Error, Result};

pub const DESK_REPLICATIONS: u64 = 30;
pub const DEFAULT_PRESET_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Sweep(SweepSpec),
    Comparison(ComparisonSpec),
}

impl Preset {
    pub fn master_seed(&self) -> u64 {
        match self {
            Preset::Sweep(s) => s.master_seed,
            Preset::Comparison(c) => c.master_seed,
        }
    }

    pub fn set_master_seed(&mut self, seed: u64) {
        match self {
            Preset::Sweep(s) => s.master_seed = seed,
            Preset::Comparison(c) => c.master_seed = seed,
        }
    }

    pub fn run(&self, out_dir: Option<&Path>) -> Result<SweepOutput> {
        match self {
            Preset::Sweep(s) => run_sweep(s, out_dir),
            Preset::Comparison(c) => run_mechanism_comparison(c, out_dir),
        }
    }
}

/// (name, description) of every preset.
pub const PRESETS: [(&str, &str); 4] = [
    ("fig1-desk", "crossover on/off: n = 50..150 step 10, k in {2,3}, p_c in {0,1}, chi = 1"),
    ("fig2-desk", "jump length and rate: n = 100..500 step 100, k in {3,4,5}, chi in {0.9,1,1.1,2}, p_c = 1"),
    ("fig3-desk", "mutation rate: n = 100, k in {2,3}, chi = 0.6..8 step 0.2, p_c = 1"),
    ("fig4-desk", "mechanisms: n = 100, k = 4, all tie-break rules, island model (mu = 2), uniform at chi = 2.6"),
];

fn desk_sweep(axes: Vec<SweepAxis>) -> SweepSpec {
    SweepSpec {
        mu: MuRule::Derived,
        replications: DESK_REPLICATIONS,
        master_seed: DEFAULT_PRESET_SEED,
        max_evaluations: DEFAULT_SWEEP_BUDGET,
        axes,
        ..SweepSpec::default()
    }
}

fn range(start: usize, stop: usize, step: usize) -> Vec<usize> {
    (start..=stop).step_by(step).collect()
}

pub fn preset(name: &str) -> Result<Preset> {
    Ok(match name {
        "fig1-desk" => Preset::Sweep(desk_sweep(vec![
            SweepAxis::N(range(50, 150, 10)),
            SweepAxis::K(vec![2, 3]),
            SweepAxis::Pc(vec![0.0, 1.0]),
        ])),
        "fig2-desk" => Preset::Sweep(desk_sweep(vec![
            SweepAxis::N(range(100, 500, 100)),
            SweepAxis::K(vec![3, 4, 5]),
            SweepAxis::Chi(vec![0.9, 1.0, 1.1, 2.0]),
        ])),
        "fig3-desk" => Preset::Sweep(SweepSpec {
            n: 100,
            ..desk_sweep(vec![
                SweepAxis::K(vec![2, 3]),
                SweepAxis::Chi((0..=37).map(|i| ((0.6 + 0.2 * i as f64) * 1e9).round() / 1e9).collect()),
            ])
        }),
        "fig4-desk" => Preset::Comparison(ComparisonSpec {
            n: 100,
            k: 4,
            mu: MuRule::Derived,
            chi: 1.0,
            mechanisms: RULE_IDS.iter().map(|s| s.to_string()).chain(["island".to_string()]).collect(),
            island_mu: 2,
            baseline_chi: Some(2.6),
            sigma: None,
            alpha: None,
            max_evaluations: DEFAULT_SWEEP_BUDGET,
            replications: DESK_REPLICATIONS,
            master_seed: DEFAULT_PRESET_SEED,
        }),
        other => return Err(Error::UnknownPreset(other.to_string())),
    })
}
