use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::grid::{support_half_width, DEFAULT_TRUNCATION_TOL};
use crate::integrator::BottomMode;
use crate::physics::DEFAULT_H_MIN;
use crate::solid::{DEFAULT_DELTA, DEFAULT_M_TILDE};
use crate::soliton::DEFAULT_TAIL_TOL;

/// Initial surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WaveKind {
    Rest,
    Single,
    /// `count` identical solitary waves, the leading one placed like a single wave.
    Train {
        count: usize,
    },
}

/// One experiment. Physical inputs are dimensional (meters, m/s^2); `dx`,
/// `dt` and `t_end` are in solver units, where lengths are measured in
/// wavelengths and times in `L / sqrt(g H0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub h0: f64,
    pub wavelength: f64,
    pub a_surf: f64,
    pub a_bott: f64,
    pub g: f64,
    pub tank_length: f64,
    pub solid_center: f64,
    /// Footprint of the truncated solid in meters; when absent the solid
    /// has the wavelength as its shape scale.
    pub solid_support: Option<f64>,
    pub truncation_tol: f64,
    pub c_fric: f64,
    pub m_tilde: f64,
    pub delta: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_end: f64,
    pub wave: WaveKind,
    /// Distance from the solid center back to the leading crest, in wavelengths.
    pub wave_offset: f64,
    /// Crest-to-crest distance of a wave train in wavelengths; by default
    /// twice the distance at which a profile decays to 1e-10 of its peak.
    pub train_spacing: Option<f64>,
    pub bottom_mode: BottomMode,
    pub snapshot_stride: usize,
    pub energy_stride: usize,
    pub corrector_iterations: usize,
    pub breaking_armed: bool,
    pub h_min: f64,
    pub override_cfl: bool,
    pub ablate_after_peak: bool,
    /// Tabulation step of the soliton profile; `dx / 10` when absent.
    pub profile_mesh: Option<f64>,
    pub tail_tol: f64,
    /// Downstream distance from the far edge of the solid, in wavelengths,
    /// at which the outgoing amplitude is read.
    pub amplitude_station: f64,
    /// Ends the run as soon as the outgoing amplitude has been read.
    pub stop_when_measured: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            h0: 20.0,
            wavelength: 40.0,
            a_surf: 4.0,
            a_bott: 6.0,
            g: 9.81,
            tank_length: 1600.0,
            solid_center: 800.0,
            solid_support: None,
            truncation_tol: DEFAULT_TRUNCATION_TOL,
            c_fric: 0.001,
            m_tilde: DEFAULT_M_TILDE,
            delta: DEFAULT_DELTA,
            dx: 0.05,
            dt: 0.005,
            t_end: 1.0,
            wave: WaveKind::Single,
            wave_offset: 2.0,
            train_spacing: None,
            bottom_mode: BottomMode::Moving,
            snapshot_stride: 100,
            energy_stride: 10,
            corrector_iterations: 1,
            breaking_armed: false,
            h_min: DEFAULT_H_MIN,
            override_cfl: false,
            ablate_after_peak: false,
            profile_mesh: None,
            tail_tol: DEFAULT_TAIL_TOL,
            amplitude_station: 2.0,
            stop_when_measured: false,
        }
    }
}

/// Nondimensional quantities derived from a config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub mu: f64,
    pub eps: f64,
    pub beta: f64,
    /// Tank length in wavelengths, rounded to a whole number of cells.
    pub tank: f64,
    pub solid_center: f64,
    pub shape_length: f64,
    pub dx_m: f64,
    pub dt_s: f64,
    pub t_end_s: f64,
    pub cfl_ratio: f64,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Configures the wavelength so that `(h0 / L)^2 = mu`.
    pub fn with_mu(mut self, mu: f64) -> Self {
        self.wavelength = self.h0 / mu.sqrt();
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.a_surf = eps * self.h0;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.a_bott = beta * self.h0;
        self
    }

    /// Places the tank walls `left` and `right` wavelengths away from the
    /// solid center.
    pub fn with_tank(mut self, left: f64, right: f64) -> Self {
        self.solid_center = left * self.wavelength;
        self.tank_length = (left + right) * self.wavelength;
        self
    }

    pub fn derive(&self) -> Result<Derived> {
        let positive = |what: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(SimError::InvalidInput(format!("{what} must be positive, got {v}")))
            }
        };
        positive("h0", self.h0)?;
        positive("wavelength", self.wavelength)?;
        positive("g", self.g)?;
        positive("a_bott", self.a_bott)?;
        positive("tank_length", self.tank_length)?;
        positive("dx", self.dx)?;
        positive("dt", self.dt)?;
        if !(self.t_end >= 0.0) {
            return Err(SimError::InvalidInput(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        if self.wave != WaveKind::Rest {
            positive("a_surf", self.a_surf)?;
        }
        let mu = (self.h0 / self.wavelength).powi(2);
        let eps = if self.a_surf > 0.0 { self.a_surf / self.h0 } else { 1.0 };
        let beta = self.a_bott / self.h0;
        for (what, v) in [("mu", mu), ("eps", eps), ("beta", beta)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(SimError::InvalidInput(format!("{what} = {v} lies outside (0, 1]")));
            }
        }
        let cells = (self.tank_length / self.wavelength / self.dx).round();
        let tank = cells * self.dx;
        let shape_length = match self.solid_support {
            Some(w) => {
                positive("solid_support", w)?;
                let unit = support_half_width(beta, 1.0, self.truncation_tol);
                w / (2.0 * self.wavelength) / unit
            }
            None => 1.0,
        };
        let time_scale = self.wavelength / (self.g * self.h0).sqrt();
        let dx_m = self.dx * self.wavelength;
        let dt_s = self.dt * time_scale;
        Ok(Derived {
            mu,
            eps,
            beta,
            tank,
            solid_center: self.solid_center / self.wavelength,
            shape_length,
            dx_m,
            dt_s,
            t_end_s: self.t_end * time_scale,
            cfl_ratio: crate::integrator::cfl_check(dt_s, dx_m, self.g, self.h0).ratio,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn paper_scales() {
        let cfg = ScenarioConfig::default().with_mu(0.1).with_eps(0.2).with_beta(0.3);
        let d = cfg.derive().unwrap();
        assert_relative_eq!(cfg.wavelength, 20.0 * 10f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(d.mu, 0.1, epsilon = 1e-14);
        assert_relative_eq!(d.eps, 0.2);
        assert_relative_eq!(d.beta, 0.3);
        // the solver-unit ratio dt/dx is the dimensional CFL ratio
        assert_relative_eq!(d.cfl_ratio, cfg.dt / cfg.dx, epsilon = 1e-12);
    }

    #[test]
    fn json_round_trip_and_defaults() {
        let cfg = ScenarioConfig {
            wave: WaveKind::Train { count: 3 },
            solid_support: Some(40.0),
            ..Default::default()
        };
        let back = ScenarioConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(cfg, back);
        let partial = ScenarioConfig::from_json(r#"{"c_fric": 0.5, "bottom_mode": "fixed"}"#).unwrap();
        assert_eq!(partial.c_fric, 0.5);
        assert_eq!(partial.bottom_mode, BottomMode::Fixed);
        assert_eq!(partial.h0, 20.0);
        assert!(ScenarioConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn support_sets_shape_scale() {
        let cfg = ScenarioConfig {
            solid_support: Some(40.0),
            ..ScenarioConfig::default().with_mu(0.1).with_beta(0.3)
        };
        let d = cfg.derive().unwrap();
        let half = support_half_width(d.beta, d.shape_length, cfg.truncation_tol);
        assert_relative_eq!(2.0 * half * cfg.wavelength, 40.0, epsilon = 1e-10);
    }

    #[test]
    fn out_of_range_parameters_rejected() {
        let cfg = ScenarioConfig::default().with_beta(1.5);
        assert!(cfg.derive().is_err());
        let cfg = ScenarioConfig {
            dx: 0.0,
            ..Default::default()
        };
        assert!(cfg.derive().is_err());
    }
}
