//! Propagation and noise model, plus the capacities of the two decoder channels.

use crate::error::{ensure_positive, Error, Result};
use crate::math::{binary_entropy, q_function};

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const SPEED_OF_LIGHT: f64 = 3e8;

/// Physical propagation and receiver-noise parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioEnvironment {
    pub carrier_frequency: f64,
    pub bandwidth: f64,
    pub path_loss_exponent: f64,
    pub temperature: f64,
}

impl RadioEnvironment {
    pub fn new(carrier_frequency: f64, bandwidth: f64, path_loss_exponent: f64, temperature: f64) -> Result<Self> {
        let env = Self {
            carrier_frequency,
            bandwidth,
            path_loss_exponent,
            temperature,
        };
        env.validate()?;
        Ok(env)
    }

    /// 60 GHz carrier, 3 GHz bandwidth, indoor exponent 3, room temperature.
    pub fn sixty_ghz() -> Self {
        Self {
            carrier_frequency: 60e9,
            bandwidth: 3e9,
            path_loss_exponent: 3.0,
            temperature: 300.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("carrier_frequency", self.carrier_frequency)?;
        ensure_positive("bandwidth", self.bandwidth)?;
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "temperature",
                reason: format!("must be finite and >= 0, got {}", self.temperature),
            });
        }
        if !(self.path_loss_exponent > 2.0 && self.path_loss_exponent.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "path_loss_exponent",
                reason: format!("must exceed 2, got {}", self.path_loss_exponent),
            });
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// Path-loss weight `max{1, (x/lambda)^alpha}` at distance `x`.
    pub fn path_weight(&self, distance: f64) -> f64 {
        (distance / self.wavelength()).powf(self.path_loss_exponent).max(1.0)
    }

    /// Noise power `kTW` over the whole band.
    pub fn noise_power(&self) -> f64 {
        BOLTZMANN * self.temperature * self.bandwidth
    }
}

/// One point-to-point link requirement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec {
    pub distance: f64,
    pub data_rate: f64,
    pub target_pe: f64,
    /// Replaces the derived path-loss weight when set (what-if studies).
    pub path_weight_override: Option<f64>,
}

impl LinkSpec {
    pub fn new(distance: f64, data_rate: f64, target_pe: f64) -> Result<Self> {
        let link = Self {
            distance,
            data_rate,
            target_pe,
            path_weight_override: None,
        };
        link.validate()?;
        Ok(link)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("distance", self.distance)?;
        ensure_positive("data_rate", self.data_rate)?;
        if !(self.target_pe > 0.0 && self.target_pe < 0.5) {
            return Err(Error::Domain {
                name: "target_pe",
                value: self.target_pe,
                expected: "(0, 1/2)",
            });
        }
        if let Some(w) = self.path_weight_override {
            if !(w >= 1.0 && w.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "path_weight",
                    reason: format!("must be finite and >= 1, got {w}"),
                });
            }
        }
        Ok(())
    }

    pub fn with_target_pe(mut self, target_pe: f64) -> Self {
        self.target_pe = target_pe;
        self
    }

    /// Bits per real channel use: QPSK at `W` complex symbols/s gives `2W` uses/s.
    pub fn spectral_rate(&self, env: &RadioEnvironment) -> f64 {
        self.data_rate / (2.0 * env.bandwidth)
    }

    /// `xi_T`, the factor converting received power into transmit power.
    pub fn path_weight(&self, env: &RadioEnvironment) -> f64 {
        self.path_weight_override
            .unwrap_or_else(|| env.path_weight(self.distance))
    }

    /// Received power for transmit power `p_t` using this link's path weight.
    pub fn received_power(&self, p_t: f64, env: &RadioEnvironment) -> f64 {
        p_t / self.path_weight(env)
    }
}

/// `min{p_t, p_t lambda^alpha / x^alpha}`.
pub fn received_power(p_t: f64, x: f64, env: &RadioEnvironment) -> f64 {
    let gain = (env.wavelength() / x).powf(env.path_loss_exponent);
    p_t * gain.min(1.0)
}

/// Thermal noise `kTW/B` in one of `sub_bands` equal sub-bands.
pub fn thermal_noise_power(env: &RadioEnvironment, sub_bands: u32) -> Result<f64> {
    if sub_bands == 0 {
        return Err(Error::InvalidParameter {
            name: "sub_bands",
            reason: "must be at least 1".into(),
        });
    }
    Ok(env.noise_power() / f64::from(sub_bands))
}

/// `1/2 log2(1 + p_r / noise_variance)` bits per real channel use.
pub fn awgn_capacity(p_r: f64, noise_variance: f64) -> f64 {
    0.5 * (p_r / noise_variance).ln_1p() / std::f64::consts::LN_2
}

/// `1 - h_b(p)` for `p` in `[0, 1/2]`.
pub fn bsc_capacity(p: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::Domain {
            name: "crossover",
            value: p,
            expected: "[0, 1/2]",
        });
    }
    Ok(1.0 - binary_entropy(p))
}

/// Per-rail crossover `Q(sqrt(P_R / kTW))` of hard-decision QPSK.
pub fn qpsk_hard_decision_crossover(p_r: f64, env: &RadioEnvironment) -> f64 {
    let noise = env.noise_power();
    if noise == 0.0 {
        return if p_r > 0.0 { 0.0 } else { 0.5 };
    }
    q_function((p_r / noise).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> RadioEnvironment {
        RadioEnvironment::sixty_ghz()
    }

    #[test]
    fn received_power_clamp_and_decay() {
        let mut e = env();
        let lambda = e.wavelength();
        assert_eq!(received_power(1.0, lambda, &e), 1.0);
        assert_eq!(received_power(1.0, lambda / 10.0, &e), 1.0);
        e.path_loss_exponent = 3.0;
        assert!((received_power(1.0, 2.0 * lambda, &e) - 0.125).abs() < 1e-15);
        let p_t = 0.37;
        let expected = p_t * (5e-3_f64 / 10.0).powi(3);
        assert!((received_power(p_t, 10.0, &e) - expected).abs() < 1e-15 * expected.max(1e-30));
    }

    #[test]
    fn received_power_monotone_and_bounded() {
        let e = env();
        let mut prev = f64::INFINITY;
        for i in 1..2000 {
            let x = 1e-4 * 1.01f64.powi(i);
            let pr = received_power(2.0, x, &e);
            assert!(pr <= 2.0 && pr <= prev);
            prev = pr;
        }
    }

    #[test]
    fn thermal_noise_values() {
        let e = env();
        let n1 = thermal_noise_power(&e, 1).unwrap();
        assert!((n1 - 1.380649e-23 * 300.0 * 3e9).abs() < 1e-25);
        assert_eq!(thermal_noise_power(&e, 2).unwrap(), n1 / 2.0);
        let cold = RadioEnvironment { temperature: 0.0, ..e };
        assert_eq!(thermal_noise_power(&cold, 1).unwrap(), 0.0);
        assert!(thermal_noise_power(&e, 0).is_err());
    }

    #[test]
    fn capacities() {
        let s = 4.2;
        assert_eq!(awgn_capacity(0.0, s), 0.0);
        assert!((awgn_capacity(3.0 * s, s) - 1.0).abs() < 1e-15);
        assert!((awgn_capacity(s, s) - 0.5).abs() < 1e-15);
        assert_eq!(bsc_capacity(0.0).unwrap(), 1.0);
        assert_eq!(bsc_capacity(0.5).unwrap(), 0.0);
        assert!((bsc_capacity(0.11).unwrap() - (1.0 - binary_entropy(0.11))).abs() < 1e-15);
        assert!(bsc_capacity(0.6).is_err());
    }

    #[test]
    fn crossover_limits() {
        let e = env();
        assert_eq!(qpsk_hard_decision_crossover(0.0, &e), 0.5);
        assert_eq!(qpsk_hard_decision_crossover(1.0, &e), 0.0);
        let snr4 = 4.0 * e.noise_power();
        assert!((qpsk_hard_decision_crossover(snr4, &e) - q_function(2.0)).abs() < 1e-16);
        let mut prev = 0.5;
        for i in 1..200 {
            let p = qpsk_hard_decision_crossover(e.noise_power() * 0.05 * i as f64, &e);
            assert!(p < prev && p > 0.0);
            prev = p;
        }
    }

    #[test]
    fn spectral_rate_matches_quarter_rate_code() {
        let link = LinkSpec::new(10.0, 1.5e9, 1e-6).unwrap();
        assert_eq!(link.spectral_rate(&env()), 0.25);
        let w = link.path_weight(&env());
        assert!((w - (10.0_f64 / 5e-3).powi(3)).abs() / w < 1e-12);
    }

    #[test]
    fn environment_validation() {
        assert!(RadioEnvironment::new(60e9, 3e9, 2.0, 300.0).is_err());
        assert!(RadioEnvironment::new(-1.0, 3e9, 3.0, 300.0).is_err());
        assert!(RadioEnvironment::new(60e9, 3e9, 3.0, 300.0).is_ok());
        assert!(LinkSpec::new(10.0, 1.5e9, 0.5).is_err());
        assert!(LinkSpec::new(0.0, 1.5e9, 0.1).is_err());
    }
}
