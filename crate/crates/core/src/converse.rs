//! Lower bounds on bit-error probability as a function of the decoding
//! neighborhood size for the BSC and the AWGN channel. Inverting them gives
//! the minimum neighborhood size for a target error probability.
//!
//! Both bounds are suprema over an atypical channel parameter (crossover `g`
//! for the BSC, noise variance for the AWGN channel). The suprema are taken
//! over the logarithm of the objective, which has the shape
//! `A(x) - n B(x) - sqrt(n) C(x)` with `B, C >= 0`. The `n`-independent terms
//! are tabulated once per channel in a [`BoundProfile`] so that the repeated
//! evaluations made while inverting in `n` only pay for the final refinement.
//!
//! The search variable is the log of the distance to the capacity edge
//! (`g - g*`, resp. `sigma^2/sigma*^2 - 1`), which keeps resolution where the
//! optimizer moves as `n` grows.

use std::f64::consts::LN_2;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::math::{
    binary_entropy, binary_entropy_inverse, golden_section, kl_bernoulli, kl_bernoulli_shift,
    kl_gaussian_ratio, minimize_1d, SolverConfig,
};

/// Relative margin kept from the open end of the search interval, where
/// `h_b^{-1}(delta) = 0` and the log objective diverges.
const EDGE_MARGIN: f64 = 1e-12;
const SCAN_POINTS: usize = 256;
const K_TABLE_POINTS: usize = 4096;

/// A channel at a fixed operating point, without the neighborhood size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConverseChannel {
    /// Binary symmetric channel with the given crossover probability.
    Bsc { crossover: f64, spectral_rate: f64 },
    /// Real AWGN channel; only the ratio `received_power / noise_variance` matters.
    Awgn {
        received_power: f64,
        noise_variance: f64,
        spectral_rate: f64,
    },
}

impl ConverseChannel {
    pub fn bsc(crossover: f64, spectral_rate: f64) -> Result<Self> {
        let ch = Self::Bsc {
            crossover,
            spectral_rate,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn awgn(received_power: f64, noise_variance: f64, spectral_rate: f64) -> Result<Self> {
        let ch = Self::Awgn {
            received_power,
            noise_variance,
            spectral_rate,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn spectral_rate(&self) -> f64 {
        match *self {
            Self::Bsc { spectral_rate, .. } | Self::Awgn { spectral_rate, .. } => spectral_rate,
        }
    }

    /// Capacity in bits per channel use.
    pub fn capacity(&self) -> f64 {
        match *self {
            Self::Bsc { crossover, .. } => 1.0 - binary_entropy(crossover.min(0.5)),
            Self::Awgn {
                received_power,
                noise_variance,
                ..
            } => crate::channel::awgn_capacity(received_power, noise_variance),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rate = self.spectral_rate();
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "spectral_rate",
                reason: format!("must be finite and > 0, got {rate}"),
            });
        }
        match *self {
            Self::Bsc { crossover, .. } => {
                if !(0.0..0.5).contains(&crossover) {
                    return Err(Error::Domain {
                        name: "crossover",
                        value: crossover,
                        expected: "[0, 1/2)",
                    });
                }
            }
            Self::Awgn {
                received_power,
                noise_variance,
                ..
            } => {
                if !(received_power >= 0.0) {
                    return Err(Error::Domain {
                        name: "received_power",
                        value: received_power,
                        expected: "[0, inf)",
                    });
                }
                if !(noise_variance > 0.0) {
                    return Err(Error::Domain {
                        name: "noise_variance",
                        value: noise_variance,
                        expected: "(0, inf)",
                    });
                }
            }
        }
        if self.capacity() <= rate {
            return Err(Error::Infeasible(format!(
                "capacity {} does not exceed the rate {rate}",
                self.capacity()
            )));
        }
        Ok(())
    }

    fn is_noiseless(&self) -> bool {
        match *self {
            Self::Bsc { crossover, .. } => crossover == 0.0,
            Self::Awgn {
                received_power,
                noise_variance,
                ..
            } => (received_power / noise_variance).is_infinite(),
        }
    }
}

/// Query for the BSC bound at a given neighborhood size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BscBoundQuery {
    pub crossover: f64,
    pub spectral_rate: f64,
    pub neighborhood: f64,
}

/// Query for the AWGN bound at a given neighborhood size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwgnBoundQuery {
    pub received_power: f64,
    pub noise_variance: f64,
    pub spectral_rate: f64,
    pub neighborhood: f64,
}

/// One evaluated bound.
///
/// `optimizer` is the maximizing crossover `g` (BSC) or noise variance
/// `sigma_G^2` in the caller's power units (AWGN). `divergence` is in bits
/// for the BSC and nats for the AWGN channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEvaluation {
    pub pe_lower_bound: f64,
    pub ln_pe_lower_bound: f64,
    pub optimizer: f64,
    pub delta: f64,
    pub divergence: f64,
}

impl BoundEvaluation {
    fn noiseless() -> Self {
        Self {
            pe_lower_bound: 0.0,
            ln_pe_lower_bound: f64::NEG_INFINITY,
            optimizer: f64::NAN,
            delta: f64::NAN,
            divergence: f64::INFINITY,
        }
    }
}

/// Smallest neighborhood meeting a target, with the bound evaluated there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborhoodBound {
    pub neighborhood: f64,
    pub evaluation: BoundEvaluation,
}

pub fn bsc_pe_lower_bound(q: &BscBoundQuery) -> Result<BoundEvaluation> {
    check_neighborhood(q.neighborhood)?;
    let profile = BoundProfile::new(ConverseChannel::bsc(q.crossover, q.spectral_rate)?)?;
    Ok(profile.evaluate(q.neighborhood))
}

pub fn awgn_pe_lower_bound(q: &AwgnBoundQuery) -> Result<BoundEvaluation> {
    check_neighborhood(q.neighborhood)?;
    let profile = BoundProfile::new(ConverseChannel::awgn(
        q.received_power,
        q.noise_variance,
        q.spectral_rate,
    )?)?;
    Ok(profile.evaluate(q.neighborhood))
}

/// Smallest real `n >= 1` whose bound does not exceed `target_pe`.
pub fn min_neighborhood(channel: &ConverseChannel, target_pe: f64) -> Result<NeighborhoodBound> {
    BoundProfile::new(*channel)?.min_neighborhood(target_pe)
}

/// Leading-order neighborhood size: `ln(1/Pe) / D(sigma*^2 || sigma_0^2)` for
/// the AWGN channel and `log2(1/Pe) / D(g* || p)` for the BSC, where the starred
/// parameter puts capacity exactly at the rate.
pub fn asymptotic_neighborhood(channel: &ConverseChannel, target_pe: f64) -> Result<f64> {
    channel.validate()?;
    check_target(target_pe, 1.0)?;
    if channel.is_noiseless() {
        return Ok(0.0);
    }
    Ok(match *channel {
        ConverseChannel::Bsc {
            crossover,
            spectral_rate,
        } => {
            let g_star = binary_entropy_inverse(1.0 - spectral_rate)?;
            -target_pe.log2() / kl_bernoulli(g_star, crossover)?
        }
        ConverseChannel::Awgn {
            received_power,
            noise_variance,
            spectral_rate,
        } => {
            let t_star = awgn_edge_ratio(received_power / noise_variance, spectral_rate);
            -target_pe.ln() / kl_gaussian_ratio(t_star)
        }
    })
}

/// `K(g) = inf_{0 < eta < 1 - g} D(g + eta || g) / eta^2`, in bits.
///
/// A 1024-point scan, log-spaced in `eta` so that it resolves the small-`eta`
/// end, refined by golden section. The `eta -> 0` limit
/// `1 / (2 ln 2 g (1 - g))` is itself a candidate for the infimum.
pub fn k_of_g(g: f64) -> Result<f64> {
    if !(g > 0.0 && g < 1.0) {
        return Err(Error::Domain {
            name: "g",
            value: g,
            expected: "(0, 1)",
        });
    }
    let span = 1.0 - g;
    let ratio = |s: f64| {
        let eta = span * s.exp();
        kl_bernoulli_shift(g, eta) / (eta * eta)
    };
    let cfg = SolverConfig::default()
        .with_grid_points(1024)
        .with_tolerances(1e-10, 1e-10);
    let lo = (1e-6_f64).ln();
    let hi = (1.0 - 1e-12_f64).ln();
    let limit = 1.0 / (2.0 * LN_2 * g * (1.0 - g));
    let found = minimize_1d(ratio, lo, hi, &cfg)?;
    Ok(found.value.min(limit))
}

fn k_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..K_TABLE_POINTS)
            .map(|i| k_of_g(k_table_abscissa(i)).expect("table abscissae lie in (0, 1)"))
            .collect()
    })
}

fn k_table_abscissa(i: usize) -> f64 {
    0.5 * (i + 1) as f64 / K_TABLE_POINTS as f64
}

/// `K(g)` by linear interpolation in a 4096-point table over `(0, 1/2]`;
/// exact evaluation below the first abscissa.
pub fn k_of_g_interpolated(g: f64) -> Result<f64> {
    let first = k_table_abscissa(0);
    if !(g >= first && g <= 0.5) {
        return k_of_g(g);
    }
    let table = k_table();
    let pos = g / first - 1.0;
    let i = (pos.floor() as usize).min(K_TABLE_POINTS - 2);
    let frac = pos - i as f64;
    Ok(table[i] + frac * (table[i + 1] - table[i]))
}

/// Variance ratio `sigma*^2 / sigma_0^2` at which AWGN capacity equals `rate`.
fn awgn_edge_ratio(snr: f64, rate: f64) -> f64 {
    snr / (2.0 * rate * LN_2).exp_m1()
}

fn check_neighborhood(n: f64) -> Result<()> {
    if n >= 1.0 && n.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "neighborhood",
            value: n,
            expected: "[1, inf)",
        })
    }
}

fn check_target(target_pe: f64, upper: f64) -> Result<()> {
    if target_pe > 0.0 && target_pe <= upper {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "target_pe",
            value: target_pe,
            expected: "(0, 1]",
        })
    }
}

/// `n`-independent parts of the log objective at one search point.
#[derive(Debug, Clone, Copy)]
struct Terms {
    /// `ln(h_b^{-1}(delta) / 2)`.
    log_prefactor: f64,
    /// Coefficient of `n`, in nats.
    linear: f64,
    /// Coefficient of `sqrt(n)`.
    root: f64,
    optimizer: f64,
    delta: f64,
    divergence: f64,
}

impl Terms {
    fn ln_objective(&self, n: f64) -> f64 {
        let v = self.log_prefactor - n * self.linear - n.sqrt() * self.root;
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }
}

/// Tabulated search grid for one channel operating point.
#[derive(Debug, Clone)]
pub struct BoundProfile {
    channel: ConverseChannel,
    /// Edge parameter: `g*` for the BSC, `sigma*^2/sigma_0^2` for the AWGN channel.
    edge: f64,
    lo: f64,
    hi: f64,
    grid: Vec<(f64, Terms)>,
    refine: SolverConfig,
}

impl BoundProfile {
    pub fn new(channel: ConverseChannel) -> Result<Self> {
        channel.validate()?;
        let rate = channel.spectral_rate();
        let mut profile = match channel {
            ConverseChannel::Bsc { .. } => {
                let edge = binary_entropy_inverse(1.0 - rate)?;
                Self {
                    channel,
                    edge,
                    lo: (EDGE_MARGIN * edge).ln(),
                    hi: (0.5 - edge).ln(),
                    grid: Vec::new(),
                    refine: SolverConfig::default().with_tolerances(1e-8, 1e-10),
                }
            }
            ConverseChannel::Awgn {
                received_power,
                noise_variance,
                ..
            } => {
                let edge = awgn_edge_ratio(received_power / noise_variance, rate);
                Self {
                    channel,
                    edge,
                    lo: EDGE_MARGIN.ln(),
                    hi: 0.0,
                    grid: Vec::new(),
                    refine: SolverConfig::default().with_tolerances(1e-8, 1e-10),
                }
            }
        };
        if let ConverseChannel::Awgn { .. } = channel {
            // Grow the upper end until the n = 1 objective turns down.
            let mut u = 1.0_f64;
            let mut prev = profile.terms(u.ln()).ln_objective(1.0);
            for _ in 0..200 {
                let next = profile.terms((2.0 * u).ln()).ln_objective(1.0);
                u *= 2.0;
                if next < prev {
                    break;
                }
                prev = next;
            }
            profile.hi = u.ln();
        }
        if !channel.is_noiseless() {
            let step = (profile.hi - profile.lo) / (SCAN_POINTS - 1) as f64;
            profile.grid = (0..SCAN_POINTS)
                .map(|i| {
                    let v = if i + 1 == SCAN_POINTS {
                        profile.hi
                    } else {
                        profile.lo + step * i as f64
                    };
                    (v, profile.terms(v))
                })
                .collect();
        }
        Ok(profile)
    }

    pub fn channel(&self) -> &ConverseChannel {
        &self.channel
    }

    fn terms(&self, v: f64) -> Terms {
        let rate = self.channel.spectral_rate();
        match self.channel {
            ConverseChannel::Bsc { crossover: p, .. } => {
                let g = (self.edge + v.exp()).min(0.5);
                let delta = (1.0 - (1.0 - binary_entropy(g)) / rate).clamp(0.0, 1.0);
                let h_inv = binary_entropy_inverse(delta).unwrap_or(0.0);
                let divergence = kl_bernoulli(g, p).unwrap_or(f64::INFINITY);
                let k = k_of_g_interpolated(g).unwrap_or(f64::NAN);
                let epsilon = ((2.0 / h_inv).log2() / k).sqrt();
                let log_ratio = (g * (1.0 - p) / (p * (1.0 - g))).ln();
                Terms {
                    log_prefactor: (0.5 * h_inv).ln(),
                    linear: divergence * LN_2,
                    root: epsilon * log_ratio,
                    optimizer: g,
                    delta,
                    divergence,
                }
            }
            ConverseChannel::Awgn {
                received_power,
                noise_variance,
                ..
            } => {
                let t = self.edge * (1.0 + v.exp());
                let snr = received_power / noise_variance;
                let capacity = 0.5 * (snr / t).ln_1p() / LN_2;
                let delta = (1.0 - capacity / rate).clamp(0.0, 1.0);
                let h_inv = binary_entropy_inverse(delta).unwrap_or(0.0);
                let divergence = kl_gaussian_ratio(t);
                Terms {
                    log_prefactor: (0.5 * h_inv).ln(),
                    linear: divergence,
                    root: (1.5 + 2.0 * (2.0 / h_inv).ln()) * (t - 1.0),
                    optimizer: t * noise_variance,
                    delta,
                    divergence,
                }
            }
        }
    }

    /// The bound at neighborhood size `n` (not checked against `n >= 1`).
    pub fn evaluate(&self, n: f64) -> BoundEvaluation {
        match self.optimum(n) {
            Some((ln_pe, t)) => BoundEvaluation {
                pe_lower_bound: ln_pe.exp(),
                ln_pe_lower_bound: ln_pe,
                optimizer: t.optimizer,
                delta: t.delta,
                divergence: t.divergence,
            },
            None => BoundEvaluation::noiseless(),
        }
    }

    /// Maximizing search point at size `n`: grid scan, then golden section
    /// between the neighbours of the best grid point.
    fn optimum(&self, n: f64) -> Option<(f64, Terms)> {
        if self.grid.is_empty() {
            return None;
        }
        let mut best = 0;
        let mut best_value = f64::NEG_INFINITY;
        for (i, (_, t)) in self.grid.iter().enumerate() {
            let v = t.ln_objective(n);
            if v > best_value {
                best = i;
                best_value = v;
            }
        }
        let a = self.grid[best.saturating_sub(1)].0;
        let b = self.grid[(best + 1).min(self.grid.len() - 1)].0;
        let mut neg = |v: f64| -self.terms(v).ln_objective(n);
        let refined = golden_section(&mut neg, a, b, &self.refine);
        let t = if -refined.value > best_value {
            self.terms(refined.x)
        } else {
            self.grid[best].1
        };
        Some((t.ln_objective(n), t))
    }

    /// Smallest `n >= 1` with bound `<= target_pe`, to `1e-10` relative.
    ///
    /// The log bound is a maximum of functions that are smooth and decreasing
    /// in `n`, so its slope at the maximizer is available for free. A Newton
    /// step in `ln n` is taken whenever it stays inside the current bracket;
    /// otherwise the bracket is bisected.
    pub fn min_neighborhood(&self, target_pe: f64) -> Result<NeighborhoodBound> {
        check_target(target_pe, 1.0)?;
        let ln_target = target_pe.ln();
        let at_one = self.evaluate(1.0);
        if at_one.ln_pe_lower_bound <= ln_target {
            return Ok(NeighborhoodBound {
                neighborhood: 1.0,
                evaluation: at_one,
            });
        }
        let seed = asymptotic_neighborhood(&self.channel, target_pe)?;
        let mut lo = 0.0_f64;
        let mut hi = if seed.is_finite() { seed.max(2.0).ln() } else { LN_2 };
        let residual = |s: f64| -> (f64, f64) {
            let n = s.exp();
            let (ln_pe, t) = self.optimum(n).expect("noisy channel has a grid");
            let slope = -n * (t.linear + 0.5 * t.root / n.sqrt());
            (ln_pe - ln_target, slope)
        };
        let (mut f_hi, mut slope_hi) = residual(hi);
        let mut guard = 0;
        while f_hi > 0.0 {
            lo = hi;
            hi += LN_2;
            guard += 1;
            if guard > 1000 || hi > 690.0 {
                return Err(Error::NoConvergence { iterations: guard });
            }
            (f_hi, slope_hi) = residual(hi);
        }
        let (mut s, mut f, mut slope) = (hi, f_hi, slope_hi);
        for _ in 0..200 {
            if hi - lo <= 1e-10 {
                break;
            }
            let newton = s - f / slope;
            let next = if slope < 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            (f, slope) = residual(next);
            s = next;
            if f <= 0.0 {
                hi = s;
            } else {
                lo = s;
                // Probe just above a root approached from below so that the
                // bracket closes from both sides.
                let probe = (s + 2.0 * (f / slope).abs() + 1e-12).min(hi);
                if probe < hi {
                    let (fp, sp) = residual(probe);
                    if fp <= 0.0 {
                        hi = probe;
                    } else {
                        lo = probe;
                        (s, f, slope) = (probe, fp, sp);
                    }
                }
            }
        }
        let neighborhood = hi.exp().max(1.0);
        Ok(NeighborhoodBound {
            neighborhood,
            evaluation: self.evaluate(neighborhood),
        })
    }
}
