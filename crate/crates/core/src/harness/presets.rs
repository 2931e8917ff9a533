//! Named scenario configurations. Desk presets are sized to run in seconds;
//! `paper-*` presets use the full 1000-wavelength tank.

use super::config::{ScenarioConfig, WaveKind};
use super::studies::fit_tank;
use crate::error::{Result, SimError};
use crate::integrator::BottomMode;

pub const PRESETS: &[(&str, &str)] = &[
    (
        "flat-soliton",
        "soliton over a flat bottom, mu = eps = 0.1, 200-wavelength tank",
    ),
    (
        "coupled",
        "sliding solid, mu = eps = 0.2, beta = 0.4, c_fric = 0.001, T = 5",
    ),
    ("cfl-stable", "nearly nondispersive flat run at dt/dx = 0.28"),
    ("cfl-unstable", "the same run at dt/dx = 5 with the guard overridden"),
    (
        "passing",
        "wave over a heavy-friction 40 m solid, mu = 0.1, eps = 0.2, beta = 0.3, c_fric = 0.5",
    ),
    (
        "sliding",
        "wave over a low-friction 40 m solid, mu = 0.1, eps = 0.2, beta = 0.4, c_fric = 0.001",
    ),
    ("amplitude", "base of the amplitude study, mu = 0.25, L = 40 m"),
    (
        "breaking",
        "breaking over a tall solid, mu = 0.25, eps = 0.35, beta = 0.5",
    ),
    ("gentle", "small wave over a small solid that never breaks"),
    (
        "damping",
        "base of the damping ablation, mu = eps = 0.2, beta = 0.4, c_fric = 0.0005",
    ),
    (
        "friction-sweep",
        "base of the friction sweep, mu = 0.25, eps = 0.25, beta = 0.3",
    ),
    (
        "single-wave",
        "one wave over a sliding solid, mu = 0.25, eps = 0.15, beta = 0.3",
    ),
    ("wave-train", "ten waves over the same solid"),
    ("paper-flat-soliton", "flat-bottom soliton in the 1000-wavelength tank"),
    ("paper-sliding", "low-friction sliding case in the 1000-wavelength tank"),
    (
        "paper-passing",
        "high-friction passing case in the 1000-wavelength tank",
    ),
    ("paper-wave-train", "ten waves in the 2000-wavelength tank"),
];

/// Footprint in meters of the solid in the single-wave passing experiments.
pub const QUOTED_SUPPORT: f64 = 40.0;

fn base(mu: f64, eps: f64, beta: f64) -> ScenarioConfig {
    ScenarioConfig::default().with_mu(mu).with_eps(eps).with_beta(beta)
}

fn paper(mut cfg: ScenarioConfig, tank: f64) -> ScenarioConfig {
    cfg = cfg.with_tank(tank / 2.0, tank / 2.0);
    cfg.dx = 0.05;
    // long-wave tails decay slowly; a looser cut keeps the profile inside half the tank
    cfg.tail_tol = 1e-6;
    cfg
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let cfg = match name {
        "flat-soliton" => {
            let mut c = base(0.1, 0.1, 0.1).with_tank(100.0, 100.0);
            c.bottom_mode = BottomMode::Flat;
            c.wave_offset = 0.0;
            c.dt = 0.001;
            c.t_end = 1.0;
            c.energy_stride = 1;
            c
        }
        "coupled" => {
            let mut c = base(0.2, 0.2, 0.4).with_tank(23.0, 18.0);
            c.wave_offset = 4.0;
            c.dt = 0.001;
            c.t_end = 5.0;
            c
        }
        "cfl-stable" | "cfl-unstable" => {
            let mut c = base(1e-5, 0.1, 0.1);
            c.bottom_mode = BottomMode::Flat;
            c.wave_offset = 0.0;
            c.dx = 1.0 / 350.0;
            c.energy_stride = 1;
            c.profile_mesh = Some(c.dx / 10.0);
            if name == "cfl-stable" {
                c.dt = 0.0008;
                c.t_end = 1.0;
            } else {
                c.dt = 5.0 * c.dx;
                c.t_end = 0.2;
                c.override_cfl = true;
            }
            fit_tank(&c)?
        }
        "passing" | "sliding" => {
            let mut c = base(0.1, 0.2, if name == "passing" { 0.3 } else { 0.4 });
            c.c_fric = if name == "passing" { 0.5 } else { 0.001 };
            c.solid_support = Some(QUOTED_SUPPORT);
            c.t_end = 12.0;
            c.stop_when_measured = true;
            fit_tank(&c)?
        }
        "amplitude" => fit_tank(&ScenarioConfig {
            t_end: 8.0,
            ..Default::default()
        })?,
        "breaking" | "gentle" => {
            let mut c = if name == "breaking" {
                base(0.25, 0.35, 0.5)
            } else {
                base(0.25, 0.1, 0.1)
            };
            c.c_fric = 0.5;
            c.breaking_armed = true;
            c.t_end = if name == "breaking" { 3.0 } else { 10.0 };
            fit_tank(&c)?
        }
        "damping" => {
            let mut c = base(0.2, 0.2, 0.4);
            c.c_fric = 0.0005;
            c.t_end = 24.0;
            c.snapshot_stride = 1000;
            fit_tank(&c)?
        }
        "friction-sweep" => {
            let mut c = base(0.25, 0.25, 0.3);
            c.t_end = 16.0;
            fit_tank(&c)?
        }
        "single-wave" | "wave-train" => {
            let mut c = base(0.25, 0.15, 0.3);
            c.t_end = 16.0;
            if name == "wave-train" {
                c.wave = WaveKind::Train { count: 10 };
                c.dx = 0.1;
                c.dt = 0.01;
                c.snapshot_stride = 0;
                c.energy_stride = 100;
            }
            fit_tank(&c)?
        }
        "paper-flat-soliton" => {
            let mut c = paper(base(0.1, 0.1, 0.1), 1000.0);
            c.bottom_mode = BottomMode::Flat;
            c.wave_offset = 0.0;
            c.dt = 0.001;
            c.t_end = 1.0;
            c
        }
        "paper-sliding" | "paper-passing" => {
            let passing = name == "paper-passing";
            let mut c = paper(base(0.1, 0.2, if passing { 0.3 } else { 0.4 }), 1000.0);
            c.c_fric = if passing { 0.5 } else { 0.001 };
            c.solid_support = Some(QUOTED_SUPPORT);
            c.t_end = 12.0;
            c
        }
        "paper-wave-train" => {
            let mut c = paper(base(0.25, 0.15, 0.3), 2000.0);
            c.wave = WaveKind::Train { count: 10 };
            c.dt = 0.005;
            c.t_end = 300.0;
            c.snapshot_stride = 0;
            c.energy_stride = 200;
            c
        }
        other => {
            return Err(SimError::InvalidInput(format!(
                "unknown preset '{other}'; known: {}",
                PRESETS.iter().map(|p| p.0).collect::<Vec<_>>().join(", ")
            )))
        }
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::prepare;

    #[test]
    fn every_preset_prepares() {
        for (name, _) in PRESETS {
            let cfg = preset(name).unwrap();
            prepare(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn unknown_preset_lists_names() {
        let err = preset("nope").unwrap_err().to_string();
        assert!(err.contains("flat-soliton"));
    }
}
