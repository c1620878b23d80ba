//! System configuration and random channel realization.
//!
//! The relay sits on the unit-length line between the two terminals at
//! normalized distance `d2` from terminal 2; channel entries are
//! uncorrelated circularly-symmetric complex Gaussians with per-entry
//! variance `1/d_i^nu`. Draws are seeded with a ChaCha8 stream so every
//! trial is bit-reproducible across platforms.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{ComplexVector, HermitianMatrix};

/// Static system parameters (antenna count, powers, geometry).
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Number of relay antennas `M_R`.
    pub m_r: usize,
    /// Terminal transmit powers (linear watts).
    pub p_t1: f64,
    pub p_t2: f64,
    /// Relay power budget.
    pub p_tr: f64,
    /// Terminal and relay noise powers.
    pub p_n1: f64,
    pub p_n2: f64,
    pub p_nr: f64,
    /// Normalized relay–terminal-2 distance, in (0, 1).
    pub d2: f64,
    /// Path-loss exponent.
    pub nu: f64,
    /// White relay noise `R_{N,R} = P_{N,R}·I`.
    pub white_relay_noise: bool,
    /// Backward channels equal forward channels.
    pub reciprocal: bool,
}

impl Default for SystemConfig {
    /// Symmetric baseline: relay at the midpoint, unit powers, unit
    /// noise, path-loss exponent 3, reciprocity, white relay noise.
    fn default() -> Self {
        Self {
            m_r: 3,
            p_t1: 1.0,
            p_t2: 1.0,
            p_tr: 1.0,
            p_n1: 1.0,
            p_n2: 1.0,
            p_nr: 1.0,
            d2: 0.5,
            nu: 3.0,
            white_relay_noise: true,
            reciprocal: true,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_r == 0 {
            return Err(Error::Config("m_r must be at least 1".into()));
        }
        for (name, v) in [
            ("p_t1", self.p_t1),
            ("p_t2", self.p_t2),
            ("p_tr", self.p_tr),
            ("p_n1", self.p_n1),
            ("p_n2", self.p_n2),
            ("p_nr", self.p_nr),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.d2 > 0.0 && self.d2 < 1.0) {
            return Err(Error::Config(format!("d2 must lie in (0,1), got {}", self.d2)));
        }
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return Err(Error::Config(format!("nu must be nonnegative, got {}", self.nu)));
        }
        Ok(())
    }

    /// Normalized relay–terminal-1 distance.
    pub fn d1(&self) -> f64 {
        1.0 - self.d2
    }

    /// Per-entry channel variance for terminal `i` (1 or 2).
    pub fn channel_variance(&self, terminal: usize) -> f64 {
        let d = match terminal {
            1 => self.d1(),
            2 => self.d2,
            _ => panic!("terminal must be 1 or 2"),
        };
        1.0 / d.powf(self.nu)
    }

    /// Loads a flat `key=value` file; keys mirror the field names and
    /// unset keys keep their defaults. Lines starting with `#` are
    /// comments.
    pub fn from_key_value_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_key_values(&text)
    }

    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got {line:?}", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |e: &dyn std::fmt::Display| {
                Error::Config(format!("line {}: bad value for {key}: {e}", lineno + 1))
            };
            match key {
                "m_r" => cfg.m_r = value.parse().map_err(|e| bad(&e))?,
                "p_t1" => cfg.p_t1 = value.parse().map_err(|e| bad(&e))?,
                "p_t2" => cfg.p_t2 = value.parse().map_err(|e| bad(&e))?,
                "p_tr" => cfg.p_tr = value.parse().map_err(|e| bad(&e))?,
                "p_n1" => cfg.p_n1 = value.parse().map_err(|e| bad(&e))?,
                "p_n2" => cfg.p_n2 = value.parse().map_err(|e| bad(&e))?,
                "p_nr" => cfg.p_nr = value.parse().map_err(|e| bad(&e))?,
                "d2" => cfg.d2 = value.parse().map_err(|e| bad(&e))?,
                "nu" => cfg.nu = value.parse().map_err(|e| bad(&e))?,
                "white_relay_noise" => {
                    cfg.white_relay_noise = value.parse().map_err(|e| bad(&e))?
                }
                "reciprocal" => cfg.reciprocal = value.parse().map_err(|e| bad(&e))?,
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One realization of the four channel vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub h1f: ComplexVector,
    pub h2f: ComplexVector,
    pub h1b: ComplexVector,
    pub h2b: ComplexVector,
}

fn draw_cscg(n: usize, variance: f64, rng: &mut ChaCha8Rng) -> ComplexVector {
    let sigma = (variance / 2.0).sqrt();
    ComplexVector::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * sigma, im * sigma)
    })
}

/// Draws one channel realization; deterministic for a fixed seed.
///
/// Backward channels are copied from the forward ones when the config is
/// reciprocal, otherwise drawn independently from the same distribution.
pub fn draw_channels(config: &SystemConfig, rng_seed: u64) -> ChannelSet {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let v1 = config.channel_variance(1);
    let v2 = config.channel_variance(2);
    let h1f = draw_cscg(config.m_r, v1, &mut rng);
    let h2f = draw_cscg(config.m_r, v2, &mut rng);
    let (h1b, h2b) = if config.reciprocal {
        (h1f.clone(), h2f.clone())
    } else {
        (
            draw_cscg(config.m_r, v1, &mut rng),
            draw_cscg(config.m_r, v2, &mut rng),
        )
    };
    ChannelSet { h1f, h2f, h1b, h2b }
}

/// Relay noise covariance `R_{N,R}`; the white case used throughout the
/// experiments. Colored noise enters through [`relay_rx_covariance_with`].
pub fn relay_noise_covariance(config: &SystemConfig) -> HermitianMatrix {
    HermitianMatrix::identity(config.m_r).scale(config.p_nr)
}

/// Covariance of the relay receive signal,
/// `R_R = P_{T,1}·h1f·h1fᴴ + P_{T,2}·h2f·h2fᴴ + R_{N,R}`.
pub fn relay_rx_covariance(config: &SystemConfig, ch: &ChannelSet) -> HermitianMatrix {
    relay_rx_covariance_with(config, ch, &relay_noise_covariance(config))
}

pub fn relay_rx_covariance_with(
    config: &SystemConfig,
    ch: &ChannelSet,
    r_nr: &HermitianMatrix,
) -> HermitianMatrix {
    let m: DMatrix<Complex64> = &ch.h1f * ch.h1f.adjoint() * Complex64::new(config.p_t1, 0.0)
        + &ch.h2f * ch.h2f.adjoint() * Complex64::new(config.p_t2, 0.0)
        + r_nr.as_matrix();
    HermitianMatrix::symmetrized(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eig;
    use approx::assert_relative_eq;

    #[test]
    fn per_entry_variance_follows_path_loss() {
        let config = SystemConfig {
            m_r: 10,
            ..SystemConfig::default()
        };
        // d2 = 0.5, nu = 3 -> variance 8 on both sides.
        let mut acc1 = 0.0;
        let mut acc2 = 0.0;
        let mut count = 0usize;
        for trial in 0..5_000u64 {
            let ch = draw_channels(&config, 1000 + trial);
            acc1 += ch.h1f.iter().map(|z| z.norm_sqr()).sum::<f64>();
            acc2 += ch.h2f.iter().map(|z| z.norm_sqr()).sum::<f64>();
            count += config.m_r;
        }
        let v1 = acc1 / count as f64;
        let v2 = acc2 / count as f64;
        assert!((v1 - 8.0).abs() < 0.16, "h1f variance {v1} not within 2% of 8");
        assert!((v2 - 8.0).abs() < 0.16, "h2f variance {v2} not within 2% of 8");
    }

    #[test]
    fn zero_path_loss_gives_unit_variance() {
        let config = SystemConfig {
            m_r: 8,
            d2: 0.17,
            nu: 0.0,
            ..SystemConfig::default()
        };
        let mut acc = 0.0;
        let mut count = 0usize;
        for trial in 0..4_000u64 {
            let ch = draw_channels(&config, 77 + trial);
            acc += ch.h1f.iter().map(|z| z.norm_sqr()).sum::<f64>();
            acc += ch.h2f.iter().map(|z| z.norm_sqr()).sum::<f64>();
            count += 2 * config.m_r;
        }
        let v = acc / count as f64;
        assert!((v - 1.0).abs() < 0.02, "variance {v} not within 2% of 1");
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let config = SystemConfig::default();
        assert_eq!(draw_channels(&config, 42), draw_channels(&config, 42));
        assert_ne!(draw_channels(&config, 42), draw_channels(&config, 43));
    }

    #[test]
    fn reciprocity_copies_forward_channels() {
        let config = SystemConfig::default();
        let ch = draw_channels(&config, 5);
        assert_eq!(ch.h1b, ch.h1f);
        assert_eq!(ch.h2b, ch.h2f);

        let nonrec = SystemConfig {
            reciprocal: false,
            ..config
        };
        let ch = draw_channels(&nonrec, 5);
        assert_ne!(ch.h1b, ch.h1f);
    }

    #[test]
    fn rx_covariance_zero_channels() {
        let config = SystemConfig {
            m_r: 3,
            p_nr: 0.7,
            ..SystemConfig::default()
        };
        let zero = ComplexVector::zeros(3);
        let ch = ChannelSet {
            h1f: zero.clone(),
            h2f: zero.clone(),
            h1b: zero.clone(),
            h2b: zero,
        };
        let r = relay_rx_covariance(&config, &ch);
        assert!((r.as_matrix() - HermitianMatrix::identity(3).scale(0.7).as_matrix()).norm() == 0.0);
    }

    #[test]
    fn rx_covariance_scalar_case() {
        let config = SystemConfig {
            m_r: 1,
            p_nr: 0.1,
            ..SystemConfig::default()
        };
        let one = ComplexVector::from_vec(vec![Complex64::new(1.0, 0.0)]);
        let two = ComplexVector::from_vec(vec![Complex64::new(2.0, 0.0)]);
        let ch = ChannelSet {
            h1f: one.clone(),
            h2f: two.clone(),
            h1b: one,
            h2b: two,
        };
        let r = relay_rx_covariance(&config, &ch);
        assert_relative_eq!(r.entry(0, 0).re, 5.1, max_relative = 1e-15);
    }

    #[test]
    fn rx_covariance_is_pd_with_noise_floor() {
        let config = SystemConfig {
            m_r: 4,
            p_nr: 0.25,
            ..SystemConfig::default()
        };
        for seed in 0..20 {
            let ch = draw_channels(&config, seed);
            let r = relay_rx_covariance(&config, &ch);
            let eig = hermitian_eig(&r);
            assert!(eig.eigenvalues[0] >= config.p_nr - 1e-10);
        }
    }

    #[test]
    fn config_file_round_trip_and_errors() {
        let text = "\n# demo config\nm_r = 4\np_t1=2.0\nd2 = 0.25\nnu=2\nwhite_relay_noise=true\nreciprocal = false\n";
        let cfg = SystemConfig::from_key_values(text).unwrap();
        assert_eq!(cfg.m_r, 4);
        assert_eq!(cfg.p_t1, 2.0);
        assert_eq!(cfg.d2, 0.25);
        assert!(!cfg.reciprocal);
        // untouched keys keep defaults
        assert_eq!(cfg.p_t2, 1.0);

        assert!(SystemConfig::from_key_values("bogus_key=1").is_err());
        assert!(SystemConfig::from_key_values("d2=1.5").is_err());
        assert!(SystemConfig::from_key_values("p_t1=-2").is_err());
        assert!(SystemConfig::from_key_values("no equals sign").is_err());
    }
}
