//! Scenario configuration, the five presets and TOML overrides.

use crate::boltzmann::{KernelParams, PenaltyParams};
use crate::coupling::ObstacleSpec;
use crate::error::{Result, SolverError};
use crate::esbgk::EsbgkParams;
use crate::euler::GAMMA;
use crate::indicators::{LaplacianNorm, Thresholds, TransportCoefficients};
use crate::mesh::{Boundary, Footprint, Layer};
use crate::transport::TransportScheme;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Knudsen number field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Knudsen {
    Uniform(f64),
    Profile(KnudsenProfile),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KnudsenProfile {
    /// `1e-6 + (atan(1 + 30x) + atan(1 - 30x)) / 2`
    Arctan,
}

impl Knudsen {
    pub fn at(&self, x: f64) -> f64 {
        match *self {
            Knudsen::Uniform(e) => e,
            Knudsen::Profile(KnudsenProfile::Arctan) => 1e-6 + 0.5 * ((1.0 + 30.0 * x).atan() + (1.0 - 30.0 * x).atan()),
        }
    }
}

/// Primitive state `(rho, u_x, u_y, P)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveState {
    pub rho: f64,
    #[serde(default)]
    pub u: [f64; 2],
    pub pressure: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitialCondition {
    /// Two states split at `x = x0`; the left state includes `x = x0`.
    Riemann { x0: f64, left: PrimitiveState, right: PrimitiveState },
    Uniform { state: PrimitiveState },
    /// `rho = rho0 + rho_amp sin(pi x)`, `T = t0 + t_amp cos(pi x)`, velocity `u`;
    /// kinetic cells start from `(M[rho, u, T] + M[rho, -u, T]) / 2`.
    Bimodal { rho0: f64, rho_amp: f64, t0: f64, t_amp: f64, u: [f64; 2] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: u8,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub origin: [f64; 2],
    pub boundary: Boundary,
    pub nv: usize,
    pub vel_extent: f64,
    pub kernel: KernelParams,
    pub knudsen: Knudsen,
    pub thresholds: Thresholds,
    pub gamma: f64,
    pub esbgk: EsbgkParams,
    pub penalty: PenaltyParams,
    pub transport_coeffs: TransportCoefficients,
    pub laplacian_norm: LaplacianNorm,
    pub transport_scheme: TransportScheme,
    /// `dt = cfl * min(dx, dy)`.
    pub cfl: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub snapshot_every: Option<usize>,
    pub workers: Option<usize>,
    pub out_dir: String,
    pub initial: InitialCondition,
    pub initial_layer: Layer,
    pub obstacle: Option<ObstacleSpec>,
    /// Full-Boltzmann steps timed for the speedup estimate; 0 disables it.
    pub speedup_samples: usize,
}

fn base(scenario: u8) -> ScenarioConfig {
    ScenarioConfig {
        scenario,
        nx: 100,
        ny: 100,
        lx: 1.0,
        ly: 1.0,
        origin: [0.0, 0.0],
        boundary: Boundary::Copy,
        nv: 16,
        vel_extent: 8.0,
        kernel: KernelParams::default(),
        knudsen: Knudsen::Uniform(1e-4),
        thresholds: Thresholds { eta0: 1e-3, eta1: 2.8e-5, delta0: 1e-4 },
        gamma: GAMMA,
        esbgk: EsbgkParams::default(),
        penalty: PenaltyParams::default(),
        transport_coeffs: TransportCoefficients::default(),
        laplacian_norm: LaplacianNorm::default(),
        transport_scheme: TransportScheme::default(),
        cfl: 0.1,
        t_end: 0.0,
        snapshot_times: Vec::new(),
        snapshot_every: None,
        workers: None,
        out_dir: format!("out/test{scenario}"),
        initial: InitialCondition::Uniform { state: PrimitiveState { rho: 1.0, u: [0.0; 2], pressure: 1.0 } },
        initial_layer: Layer::Euler,
        obstacle: None,
        speedup_samples: 1,
    }
}

impl ScenarioConfig {
    pub fn preset(scenario: u8) -> Result<Self> {
        let mut c = base(scenario);
        match scenario {
            1 => {
                c.nx = 100;
                c.ny = 16;
                c.ly = 0.16;
                c.nv = 32;
                c.knudsen = Knudsen::Uniform(1e-6);
                c.thresholds = Thresholds { eta0: 1e-5, eta1: 3.5e-10, delta0: 1e-3 };
                c.t_end = 0.16;
                c.snapshot_times = vec![0.16];
                c.initial = InitialCondition::Riemann {
                    x0: 0.5,
                    left: PrimitiveState { rho: 1.0, u: [0.0; 2], pressure: 1.0 },
                    right: PrimitiveState { rho: 0.125, u: [0.0; 2], pressure: 0.1 },
                };
            }
            2 => {
                c.t_end = 0.225;
                c.snapshot_times = vec![0.075, 0.15, 0.225];
                c.initial = InitialCondition::Uniform { state: PrimitiveState { rho: 1.0, u: [3.0, 0.0], pressure: 1.0 } };
                c.obstacle = Some(ObstacleSpec {
                    footprint: Footprint::Rect { i0: 25, i1: 35, j0: 40, j1: 60 },
                    rho: 1.0,
                    pressure: 1.5,
                    u: [0.0; 2],
                    motion: None,
                });
            }
            3 => {
                c.t_end = 0.080;
                c.snapshot_times = vec![0.032, 0.054, 0.080];
                c.initial = InitialCondition::Uniform { state: PrimitiveState { rho: 0.3, u: [0.0; 2], pressure: 0.9 } };
                c.obstacle = Some(ObstacleSpec {
                    footprint: Footprint::Rect { i0: 45, i1: 55, j0: 86, j1: 96 },
                    rho: 0.3,
                    pressure: 1.3,
                    u: [0.0; 2],
                    motion: Some([0, -1]),
                });
            }
            4 => {
                c.t_end = 0.15;
                c.snapshot_times = vec![0.05, 0.1, 0.15];
                c.initial = InitialCondition::Uniform { state: PrimitiveState { rho: 1.0, u: [1.0, 0.0], pressure: 1.0 } };
                c.obstacle = Some(ObstacleSpec {
                    footprint: Footprint::Disk { cx: 30.0, cy: 50.0, r: 10.0 },
                    rho: 1.0,
                    pressure: 1.5,
                    u: [0.0; 2],
                    motion: None,
                });
            }
            5 => {
                c.nx = 50;
                c.ny = 16;
                c.lx = 1.0;
                c.ly = 0.32;
                c.origin = [-0.5, -0.16];
                c.knudsen = Knudsen::Profile(KnudsenProfile::Arctan);
                c.thresholds = Thresholds { eta0: 4e-2, eta1: 8e-2, delta0: 1e-3 };
                c.t_end = 0.1;
                c.snapshot_times = vec![0.02, 0.05, 0.1];
                c.initial = InitialCondition::Bimodal { rho0: 1.0, rho_amp: 0.1, t0: 1.0, t_amp: 0.2, u: [0.125, 0.0] };
                c.initial_layer = Layer::Esbgk;
            }
            _ => return Err(SolverError::Config(format!("unknown scenario {scenario}; expected 1 to 5"))),
        }
        // The linear reconstruction undershoots at the jump between a fixed-state obstacle
        // and a fast stream, driving wake cells to negative temperature.
        if c.obstacle.is_some() {
            c.transport_scheme = TransportScheme::Weno;
        }
        Ok(c)
    }

    /// Preset for `scenario` with the keys of a TOML document merged on top.
    pub fn from_toml(scenario: u8, overrides: &str) -> Result<Self> {
        let preset = Self::preset(scenario)?;
        let mut value = toml::Value::try_from(&preset).map_err(|e| SolverError::Config(e.to_string()))?;
        let over: toml::Value = toml::from_str(overrides).map_err(|e| SolverError::Config(format!("invalid config: {e}")))?;
        merge(&mut value, over);
        let cfg: ScenarioConfig = value.try_into().map_err(|e: toml::de::Error| SolverError::Config(format!("invalid config: {e}")))?;
        if cfg.scenario != scenario {
            return Err(SolverError::Config(format!("config names scenario {} but {scenario} was requested", cfg.scenario)));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(scenario: u8, path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::from_toml(scenario, &std::fs::read_to_string(p)?),
            None => {
                let c = Self::preset(scenario)?;
                c.validate()?;
                Ok(c)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.thresholds.validate()?;
        let bad = |m: String| Err(SolverError::Config(m));
        if self.nx < 5 || self.ny < 5 {
            return bad(format!("grid {}x{} is smaller than the 5-point stencil", self.nx, self.ny));
        }
        if (self.gamma - GAMMA).abs() > 1e-12 {
            return bad(format!("only the monatomic ratio 5/3 is supported, got {}", self.gamma));
        }
        if !(self.cfl > 0.0) || !(self.t_end >= 0.0) {
            return bad("cfl must be positive and t_end non-negative".into());
        }
        if self.nv < 4 || !(self.vel_extent > 0.0) {
            return bad("velocity grid needs at least 4 nodes and a positive extent".into());
        }
        if let Knudsen::Uniform(e) = self.knudsen {
            if !(e > 0.0) {
                return bad(format!("Knudsen number must be positive, got {e}"));
            }
        }
        if self.transport_coeffs.mu0 <= 0.0 || self.transport_coeffs.kappa0 <= 0.0 {
            return bad("transport coefficients must be positive".into());
        }
        if self.workers == Some(0) {
            return bad("worker count must be positive".into());
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.cfl * (self.lx / self.nx as f64).min(self.ly / self.ny as f64)
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt() - 1e-9).ceil().max(0.0) as usize
    }

    /// Step index after which a snapshot time is reached.
    pub fn snapshot_steps(&self) -> Vec<usize> {
        let dt = self.dt();
        let mut s: Vec<usize> = self.snapshot_times.iter().map(|t| ((t / dt) - 1e-9).ceil().max(0.0) as usize).collect();
        s.dedup();
        s
    }
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_table() && v.is_table() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_published_parameters() {
        let t1 = ScenarioConfig::preset(1).unwrap();
        assert_eq!((t1.nx, t1.ny, t1.nv), (100, 16, 32));
        assert_eq!(t1.knudsen, Knudsen::Uniform(1e-6));
        assert_eq!((t1.thresholds.eta0, t1.thresholds.eta1, t1.thresholds.delta0), (1e-5, 3.5e-10, 1e-3));
        assert!((t1.dt() - 1e-3).abs() < 1e-15);
        assert_eq!(t1.steps(), 160);
        let t2 = ScenarioConfig::preset(2).unwrap();
        assert_eq!((t2.nx, t2.ny, t2.nv), (100, 100, 16));
        assert_eq!((t2.thresholds.eta0, t2.thresholds.eta1, t2.thresholds.delta0), (1e-3, 2.8e-5, 1e-4));
        assert_eq!(t2.initial, InitialCondition::Uniform { state: PrimitiveState { rho: 1.0, u: [3.0, 0.0], pressure: 1.0 } });
        assert_eq!(t2.snapshot_steps(), vec![75, 150, 225]);
        for s in 1..=5 {
            let c = ScenarioConfig::preset(s).unwrap();
            let expected = if (2..=4).contains(&s) { TransportScheme::Weno } else { TransportScheme::Linear };
            assert_eq!(c.transport_scheme, expected);
        }
        let t5 = ScenarioConfig::preset(5).unwrap();
        assert_eq!((t5.nx, t5.ny), (50, 16));
        assert_eq!(t5.initial_layer, Layer::Esbgk);
        assert!((t5.lx / t5.nx as f64 - t5.ly / t5.ny as f64).abs() < 1e-15);
        assert!((t5.knudsen.at(0.0) - (1e-6 + 1f64.atan())).abs() < 1e-15);
        for s in 1..=5 {
            ScenarioConfig::preset(s).unwrap().validate().unwrap();
        }
        assert!(ScenarioConfig::preset(6).is_err());
    }

    #[test]
    fn toml_overrides_merge_over_preset() {
        let c = ScenarioConfig::from_toml(2, "t_end = 0.01\n[thresholds]\neta0 = 0.5\n").unwrap();
        assert_eq!(c.t_end, 0.01);
        assert_eq!(c.thresholds.eta0, 0.5);
        assert_eq!(c.thresholds.eta1, 2.8e-5);
        assert_eq!(c.nx, 100);
        let c = ScenarioConfig::from_toml(5, "knudsen = 0.01").unwrap();
        assert_eq!(c.knudsen, Knudsen::Uniform(0.01));
    }

    #[test]
    fn invalid_overrides_are_rejected() {
        assert!(ScenarioConfig::from_toml(1, "[thresholds]\neta1 = -1.0\n").is_err());
        assert!(ScenarioConfig::from_toml(1, "no_such_key = 3").is_err());
        assert!(ScenarioConfig::from_toml(1, "scenario = 2").is_err());
        assert!(ScenarioConfig::from_toml(1, "gamma = 1.4").is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        for s in 1..=5 {
            let c = ScenarioConfig::preset(s).unwrap();
            let text = toml::to_string(&c).unwrap();
            assert_eq!(ScenarioConfig::from_toml(s, &text).unwrap(), c);
        }
    }
}
