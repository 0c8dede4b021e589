//! Run configuration (TOML). Unknown keys are rejected everywhere.

use std::path::Path;

use ncs_sched::certificates::{CertificateScalars, DesignGrid};
use ncs_sched::cycles::{generate_candidate_cycle, pair_cycle, rotation_cycle, Cycle, TFactors, DEFAULT_T_MAX};
use ncs_sched::design::DesignOptions;
use ncs_sched::graph::VertexLabel;
use ncs_sched::matops::Matrix;
use ncs_sched::plants::{config_with_lqr_gains, NcsConfig, PlantSpec};
use ncs_sched::rng::SeededRng;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Number of plants served per time step.
    pub capacity: usize,
    /// Weights for LQR gains; required when any plant omits `k`.
    pub lqr: Option<LqrWeights>,
    pub plants: Vec<PlantEntry>,
    pub cycle: Option<CycleSource>,
    /// Certificate scalars `(λ_s, λ_u, μ_su, μ_us)` per plant, for checking a
    /// cycle without running the design.
    pub scalars: Option<Vec<[f64; 4]>>,
    #[serde(default)]
    pub design: DesignSection,
    #[serde(default)]
    pub simulation: SimulationSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LqrWeights {
    pub q: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantEntry {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub k: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum CycleSource {
    /// Explicit stable sets, optionally with T-factors.
    Explicit { stable_sets: Vec<Vec<usize>>, t_factors: Option<Vec<u64>> },
    /// `({1}, …, {N})`; needs `M = 1`.
    Rotation,
    /// Two-vertex cycle from `v0`; needs `M ≥ N/2`.
    Pair { v0: Vec<usize> },
    /// Random candidate cycle drawn from `seed`.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub h_s: f64,
    pub h_u: f64,
    pub kappa_min: f64,
    pub lmi_tol: f64,
    pub t_max: u64,
}

impl Default for DesignSection {
    fn default() -> Self {
        let g = DesignGrid::default();
        Self { h_s: g.h_s, h_u: g.h_u, kappa_min: g.kappa_min, lmi_tol: g.lmi_tol, t_max: DEFAULT_T_MAX }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub horizon: usize,
    pub initial: InitialConditions,
    /// Groups of the round-robin baseline; default is consecutive blocks of
    /// `M` plants, wrapping around.
    pub round_robin: Option<Vec<Vec<usize>>>,
    pub round_robin_dwell: u64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            horizon: 60,
            initial: InitialConditions::Uniform { seed: 2024, count: 100, range: 10.0 },
            round_robin: None,
            round_robin_dwell: 1,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialConditions {
    /// `count` draws uniform in `[−range, range]^d` for every plant.
    Uniform { seed: u64, count: usize, range: f64 },
    /// Explicit runs: `states[run][plant]` is that plant's initial state.
    Explicit { states: Vec<Vec<Vec<f64>>> },
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config { path: path.into(), message: e.to_string() })?;
        cfg.validate().map_err(|message| CliError::Config { path: path.into(), message })?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        if self.plants.is_empty() {
            return Err("at least one plant is required".into());
        }
        if self.lqr.is_none() && self.plants.iter().any(|p| p.k.is_none()) {
            return Err("a plant has no gain `k` and no [lqr] weights are given".into());
        }
        if let Some(s) = &self.scalars {
            if s.len() != self.plants.len() {
                return Err(format!("{} scalar rows for {} plants", s.len(), self.plants.len()));
            }
        }
        self.grid().validate().map_err(|e| e.to_string())?;
        if self.design.t_max == 0 {
            return Err("design.t_max must be positive".into());
        }
        if let InitialConditions::Uniform { count, range, .. } = self.simulation.initial {
            if count == 0 || !(range > 0.0 && range.is_finite()) {
                return Err("simulation.initial needs count > 0 and a positive finite range".into());
            }
        }
        if self.simulation.round_robin_dwell == 0 {
            return Err("simulation.round_robin_dwell must be positive".into());
        }
        Ok(())
    }

    pub fn num_plants(&self) -> usize {
        self.plants.len()
    }

    pub fn grid(&self) -> DesignGrid {
        let d = &self.design;
        DesignGrid { h_s: d.h_s, h_u: d.h_u, kappa_min: d.kappa_min, lmi_tol: d.lmi_tol }
    }

    pub fn design_options(&self, t_max: Option<u64>) -> DesignOptions {
        DesignOptions { grid: self.grid(), t_max: t_max.unwrap_or(self.design.t_max) }
    }

    /// Plants with their gains, computed by LQR where `k` is omitted.
    pub fn ncs(&self) -> Result<NcsConfig<f64>, CliError> {
        let bad = |e: &dyn std::fmt::Display| CliError::Input(e.to_string());
        let a: Vec<Matrix<f64>> = self.plants.iter().map(|p| Matrix::from_rows(&p.a)).collect::<Result<_, _>>().map_err(|e| bad(&e))?;
        let b: Vec<Matrix<f64>> = self.plants.iter().map(|p| Matrix::from_rows(&p.b)).collect::<Result<_, _>>().map_err(|e| bad(&e))?;
        if self.plants.iter().all(|p| p.k.is_some()) && self.lqr.is_none() {
            let plants = a
                .into_iter()
                .zip(b)
                .zip(&self.plants)
                .enumerate()
                .map(|(i, ((a, b), p))| {
                    let k = Matrix::from_rows(p.k.as_ref().expect("checked")).map_err(|e| bad(&e))?;
                    PlantSpec::new(i + 1, a, b, k).map_err(|e| bad(&e))
                })
                .collect::<Result<Vec<_>, _>>()?;
            return NcsConfig::new(plants, self.capacity).map_err(|e| bad(&e));
        }
        let w = self.lqr.as_ref().expect("validated");
        let q = Matrix::from_rows(&w.q).map_err(|e| bad(&e))?;
        let r = Matrix::from_rows(&w.r).map_err(|e| bad(&e))?;
        let lqr = config_with_lqr_gains(a, b, &q, &r, self.capacity).map_err(|e| bad(&e))?;
        // Explicit gains take precedence over LQR where given.
        let plants = lqr
            .plants()
            .iter()
            .zip(&self.plants)
            .map(|(spec, p)| match &p.k {
                Some(k) => {
                    let k = Matrix::from_rows(k).map_err(|e| bad(&e))?;
                    PlantSpec::new(spec.index(), spec.a().clone(), spec.b().clone(), k).map_err(|e| bad(&e))
                }
                None => Ok(spec.clone()),
            })
            .collect::<Result<Vec<_>, _>>()?;
        NcsConfig::new(plants, self.capacity).map_err(|e| bad(&e))
    }

    /// The configured cycle and any T-factors given with it.
    pub fn cycle(&self) -> Result<(Cycle, Option<TFactors>), CliError> {
        let n = self.num_plants();
        let src = self.cycle.as_ref().ok_or_else(|| CliError::Input("no [cycle] section and no --cycle file".into()))?;
        let e = |e: ncs_sched::cycles::CycleError| CliError::Input(e.to_string());
        Ok(match src {
            CycleSource::Explicit { stable_sets, t_factors } => {
                let cycle = Cycle::from_stable_sets(n, stable_sets).map_err(e)?;
                let t = t_factors.as_ref().map(|t| TFactors::new(t.clone())).transpose().map_err(e)?;
                (cycle, t)
            }
            CycleSource::Rotation => (rotation_cycle(n).map_err(e)?, None),
            CycleSource::Pair { v0 } => (pair_cycle(n, self.capacity, v0).map_err(e)?, None),
            CycleSource::Random { seed } => (generate_candidate_cycle(n, self.capacity, *seed).map_err(e)?, None),
        })
    }

    pub fn certificate_scalars(&self) -> Option<Result<Vec<CertificateScalars<f64>>, CliError>> {
        self.scalars.as_ref().map(|rows| {
            rows.iter()
                .enumerate()
                .map(|(i, v)| CertificateScalars::from_f64(i + 1, *v).map_err(|e| CliError::Input(e.to_string())))
                .collect()
        })
    }

    /// Initial states `runs[run][plant]`.
    pub fn initial_states(&self, seed_override: Option<u64>) -> Result<Vec<Vec<Vec<f64>>>, CliError> {
        let n = self.num_plants();
        match &self.simulation.initial {
            InitialConditions::Uniform { seed, count, range } => {
                let d = self.plants[0].a.len();
                let mut rng = SeededRng::new(seed_override.unwrap_or(*seed));
                Ok((0..*count).map(|_| (0..n).map(|_| (0..d).map(|_| rng.uniform(-range, *range)).collect()).collect()).collect())
            }
            InitialConditions::Explicit { states } => {
                if states.iter().any(|run| run.len() != n) {
                    return Err(CliError::Input(format!("every explicit run needs {n} initial states")));
                }
                Ok(states.clone())
            }
        }
    }

    /// Round-robin groups as vertex labels.
    pub fn round_robin_groups(&self) -> Result<Vec<VertexLabel>, CliError> {
        let (n, m) = (self.num_plants(), self.capacity);
        let groups: Vec<Vec<usize>> = match &self.simulation.round_robin {
            Some(g) => g.clone(),
            None => {
                let blocks = n.div_ceil(m);
                (0..blocks).map(|b| (0..m).map(|j| (b * m + j) % n + 1).collect()).collect()
            }
        };
        groups
            .into_iter()
            .map(|g| VertexLabel::new(n, g).map_err(|e| CliError::Input(e.to_string())))
            .collect()
    }
}

/// Reads a cycle file: one vertex per line as `{i,j,…}`, optionally followed
/// by its T-factor. Blank lines and `#` comments are ignored. T-factors must
/// be given for all vertices or none.
pub fn read_cycle_file(path: &Path, n: usize) -> Result<(Cycle, Option<TFactors>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    let bad = |line: usize, msg: String| CliError::Config { path: path.into(), message: format!("line {line}: {msg}") };
    let mut vertices = Vec::new();
    let mut dwell = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let close = line.find('}').ok_or_else(|| bad(k + 1, "expected `{i,j,…}`".into()))?;
        let v = ncs_sched::graph::parse_stable_set(n, &line[..=close]).map_err(|e| bad(k + 1, e.to_string()))?;
        vertices.push(v);
        let rest = line[close + 1..].trim();
        if !rest.is_empty() {
            dwell.push(rest.parse::<u64>().map_err(|e| bad(k + 1, format!("T-factor `{rest}`: {e}")))?);
        }
    }
    if !dwell.is_empty() && dwell.len() != vertices.len() {
        return Err(bad(0, "give a T-factor for every vertex or for none".into()));
    }
    let cycle = Cycle::new(vertices).map_err(|e| bad(0, e.to_string()))?;
    let t = if dwell.is_empty() { None } else { Some(TFactors::new(dwell).map_err(|e| bad(0, e.to_string()))?) };
    Ok((cycle, t))
}
