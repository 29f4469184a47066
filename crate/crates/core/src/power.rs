//! Total-power lower bounds built from the neighborhood converse, and the
//! optimization of transmit power against decoding power.

use std::f64::consts::LN_2;

use rayon::prelude::*;

use crate::channel::{awgn_capacity, qpsk_hard_decision_crossover, LinkSpec, RadioEnvironment};
use crate::converse::{BoundProfile, ConverseChannel};
use crate::error::{ensure_positive, Error, Result};
use crate::math::{binary_entropy, bisect_monotone, golden_section, SolverConfig};

/// Decoder implementation technology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderTech {
    /// `E_node`, joules per processing element per iteration.
    pub node_energy: f64,
    /// `zeta`, the maximum number of neighbours of a processing element.
    pub max_degree: u32,
    /// `xi_D`, weight of decoding power in the total.
    pub decode_weight: f64,
    /// `R_dec` in bits/s; the link data rate when unset.
    pub decode_throughput: Option<f64>,
}

impl DecoderTech {
    pub fn new(node_energy: f64, max_degree: u32) -> Result<Self> {
        let tech = Self {
            node_energy,
            max_degree,
            decode_weight: 1.0,
            decode_throughput: None,
        };
        tech.validate()?;
        Ok(tech)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("node_energy", self.node_energy)?;
        ensure_positive("decode_weight", self.decode_weight)?;
        if self.max_degree < 2 {
            return Err(Error::InvalidParameter {
                name: "max_degree",
                reason: format!("must be at least 2, got {}", self.max_degree),
            });
        }
        if let Some(r) = self.decode_throughput {
            ensure_positive("decode_throughput", r)?;
        }
        Ok(())
    }

    pub fn decode_rate(&self, link: &LinkSpec) -> f64 {
        self.decode_throughput.unwrap_or(link.data_rate)
    }

    /// `gamma = xi_D E_node R_dec / R_ch`, the weighted power of one iteration.
    pub fn gamma(&self, link: &LinkSpec, env: &RadioEnvironment) -> f64 {
        self.decode_weight * self.node_energy * self.decode_rate(link) / link.spectral_rate(env)
    }
}

/// Channel model seen by the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    /// QPSK with hard decisions on each rail.
    Bsc,
    /// Soft outputs, real AWGN per dimension.
    Awgn,
}

impl ChannelKind {
    /// Capacity in bits per channel use at received power `p_r`.
    pub fn capacity(self, p_r: f64, env: &RadioEnvironment) -> f64 {
        match self {
            Self::Bsc => 1.0 - binary_entropy(qpsk_hard_decision_crossover(p_r, env)),
            Self::Awgn => awgn_capacity(p_r, env.noise_power()),
        }
    }

    /// The converse channel at received power `p_r`.
    pub fn converse_channel(self, p_r: f64, r_ch: f64, env: &RadioEnvironment) -> Result<ConverseChannel> {
        match self {
            Self::Bsc => ConverseChannel::bsc(qpsk_hard_decision_crossover(p_r, env), r_ch),
            Self::Awgn => ConverseChannel::awgn(p_r, env.noise_power(), r_ch),
        }
    }
}

/// One evaluated operating point of the total-power bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPoint {
    pub transmit_power: f64,
    pub received_power: f64,
    /// `xi_T`.
    pub path_weight: f64,
    pub neighborhood: f64,
    pub iterations: f64,
    /// Unweighted decoding power `E_node l R_dec / R_ch`.
    pub decode_power: f64,
    /// `P_T + xi_D P_D`.
    pub total_power: f64,
    pub gamma: f64,
    /// Maximizing crossover (BSC) or noise variance in watts (AWGN).
    pub optimizer: f64,
}

/// Number of nodes within `l` hops of the root when every node has at most
/// `zeta` neighbours: `zeta ((zeta - 1)^l - 1) / (zeta - 2) + 1`, or `2l + 1`
/// for `zeta = 2`.
pub fn neighborhood_size(iterations: u32, zeta: u32) -> Result<u64> {
    if zeta < 2 {
        return Err(Error::InvalidParameter {
            name: "max_degree",
            reason: format!("must be at least 2, got {zeta}"),
        });
    }
    let z = u64::from(zeta);
    if z == 2 {
        return Ok(2 * u64::from(iterations) + 1);
    }
    let grown = (z - 1)
        .checked_pow(iterations)
        .ok_or_else(|| Error::InvalidParameter {
            name: "iterations",
            reason: "neighborhood size overflows u64".into(),
        })?;
    Ok(z * (grown - 1) / (z - 2) + 1)
}

/// Fewest (real) iterations whose neighborhood can hold `n` nodes, clamped at 0.
pub fn iterations_lower_bound(n: f64, zeta: u32) -> Result<f64> {
    if !(n >= 1.0) {
        return Err(Error::Domain {
            name: "neighborhood",
            value: n,
            expected: "[1, inf)",
        });
    }
    if zeta < 2 {
        return Err(Error::InvalidParameter {
            name: "max_degree",
            reason: format!("must be at least 2, got {zeta}"),
        });
    }
    let z = f64::from(zeta);
    let l = if zeta == 2 {
        (n - 1.0) / 2.0
    } else {
        ((z - 2.0) / z * n + 2.0 / z).log2() / (z - 1.0).log2()
    };
    Ok(l.max(0.0))
}

/// `E_node l R_dec / R_ch`.
pub fn decoding_power_lower_bound(iterations: f64, tech: &DecoderTech, decode_rate: f64, r_ch: f64) -> Result<f64> {
    if !(iterations >= 0.0) {
        return Err(Error::Domain {
            name: "iterations",
            value: iterations,
            expected: "[0, inf)",
        });
    }
    ensure_positive("spectral_rate", r_ch)?;
    Ok(tech.node_energy * iterations * decode_rate / r_ch)
}

/// Total-power lower bound at transmit power `p_t`.
pub fn total_power_lower_bound(
    p_t: f64,
    link: &LinkSpec,
    env: &RadioEnvironment,
    tech: &DecoderTech,
    kind: ChannelKind,
) -> Result<BoundPoint> {
    ensure_positive("transmit_power", p_t)?;
    let xi_t = link.path_weight(env);
    let p_r = p_t / xi_t;
    let r_ch = link.spectral_rate(env);
    let channel = kind.converse_channel(p_r, r_ch, env)?;
    let nb = BoundProfile::new(channel)?.min_neighborhood(link.target_pe)?;
    let l = iterations_lower_bound(nb.neighborhood, tech.max_degree)?;
    let decode_rate = tech.decode_rate(link);
    let p_d = decoding_power_lower_bound(l, tech, decode_rate, r_ch)?;
    Ok(BoundPoint {
        transmit_power: p_t,
        received_power: p_r,
        path_weight: xi_t,
        neighborhood: nb.neighborhood,
        iterations: l,
        decode_power: p_d,
        total_power: p_t + tech.decode_weight * p_d,
        gamma: tech.gamma(link, env),
        optimizer: nb.evaluation.optimizer,
    })
}

/// Transmit power at which capacity equals the spectral rate.
pub fn shannon_limit_transmit_power(link: &LinkSpec, env: &RadioEnvironment, kind: ChannelKind) -> Result<f64> {
    let r_ch = link.spectral_rate(env);
    let xi_t = link.path_weight(env);
    let noise = env.noise_power();
    if noise == 0.0 {
        return Ok(0.0);
    }
    match kind {
        ChannelKind::Awgn => Ok(xi_t * noise * (2.0 * r_ch * LN_2).exp_m1()),
        ChannelKind::Bsc => {
            if r_ch >= 1.0 {
                return Err(Error::Infeasible(format!(
                    "a BSC cannot carry {r_ch} bits per use"
                )));
            }
            // Capacity is increasing in the SNR; search ln(SNR).
            let cfg = SolverConfig::default().with_tolerances(1e-14, 1e-14);
            let cap = |ln_snr: f64| kind.capacity(ln_snr.exp() * noise, env);
            let ln_snr = bisect_monotone(cap, r_ch, -60.0, 10.0, &cfg)?;
            // Nudge upward so the returned power is feasible.
            let mut p_r = ln_snr.exp() * noise;
            while kind.capacity(p_r, env) <= r_ch {
                p_r *= 1.0 + 1e-14;
            }
            Ok(xi_t * p_r)
        }
    }
}

/// Search settings for [`optimize_transmit_power`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSearch {
    pub grid_points: usize,
    /// Smallest relative excess `P_T / P_Shannon - 1` examined.
    pub min_excess: f64,
    /// Largest ratio `P_T / P_Shannon` examined.
    pub max_ratio: f64,
    pub refine: SolverConfig,
}

impl Default for PowerSearch {
    fn default() -> Self {
        Self {
            grid_points: 512,
            min_excess: 1e-6,
            max_ratio: 1e6,
            refine: SolverConfig::default().with_tolerances(1e-9, 1e-9),
        }
    }
}

impl PowerSearch {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 3 {
            return Err(Error::InvalidParameter {
                name: "grid_points",
                reason: format!("must be at least 3, got {}", self.grid_points),
            });
        }
        ensure_positive("min_excess", self.min_excess)?;
        if !(self.max_ratio > 1.0 + self.min_excess && self.max_ratio.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "max_ratio",
                reason: format!("must exceed 1 + min_excess, got {}", self.max_ratio),
            });
        }
        self.refine.validate()
    }
}

/// Minimizes the total-power bound over transmit power.
///
/// The search variable is `u = ln(P_T / P_Shannon - 1)`, scanned on a uniform
/// grid from `ln(min_excess)` to `ln(max_ratio - 1)` and refined by golden
/// section between the neighbours of the best grid point. Working in the
/// excess over the Shannon limit resolves optima that sit a tiny relative
/// distance above it, which is where they fall when decoding is cheap
/// compared with transmission.
pub fn optimize_transmit_power(
    link: &LinkSpec,
    env: &RadioEnvironment,
    tech: &DecoderTech,
    kind: ChannelKind,
    search: &PowerSearch,
) -> Result<BoundPoint> {
    search.validate()?;
    let p_sh = shannon_limit_transmit_power(link, env, kind)?;
    if p_sh == 0.0 {
        return Err(Error::Infeasible("noiseless environment has no Shannon-limit power".into()));
    }
    let at = |u: f64| total_power_lower_bound(p_sh * (1.0 + u.exp()), link, env, tech, kind);
    let lo = search.min_excess.ln();
    let hi = (search.max_ratio - 1.0).ln();
    let m = search.grid_points;
    let step = (hi - lo) / (m - 1) as f64;
    let u_at = |i: usize| if i + 1 == m { hi } else { lo + step * i as f64 };

    let mut best: Option<(usize, BoundPoint)> = None;
    for i in 0..m {
        if let Ok(p) = at(u_at(i)) {
            if best.is_none_or(|(_, b)| p.total_power < b.total_power) {
                best = Some((i, p));
            }
        }
    }
    let (i, grid_best) = best.ok_or_else(|| {
        Error::Infeasible("no transmit power on the search grid is feasible".into())
    })?;
    let a = u_at(i.saturating_sub(1));
    let b = u_at((i + 1).min(m - 1));
    let mut objective = |u: f64| at(u).map_or(f64::INFINITY, |p| p.total_power);
    let refined = golden_section(&mut objective, a, b, &search.refine);
    if refined.value < grid_best.total_power {
        at(refined.x)
    } else {
        Ok(grid_best)
    }
}

/// `1 - (2 gamma / ln 2) C'(P_T) / (C(P_T) - R)` with a central difference of
/// relative step `1e-6` for `C'`.
pub fn stationarity_residual<C>(p_t: f64, gamma: f64, capacity: C, r_ch: f64) -> Result<f64>
where
    C: Fn(f64) -> f64,
{
    ensure_positive("transmit_power", p_t)?;
    let c = capacity(p_t);
    if !(c > r_ch) {
        return Err(Error::Infeasible(format!(
            "capacity {c} at P_T = {p_t} does not exceed the rate {r_ch}"
        )));
    }
    if gamma == 0.0 {
        return Ok(1.0);
    }
    let h = 1e-6 * p_t;
    let slope = (capacity(p_t + h) - capacity(p_t - h)) / (2.0 * h);
    Ok(1.0 - 2.0 * gamma / LN_2 * slope / (c - r_ch))
}

/// Transmit power minimizing `P_T - (2 gamma / ln 2) ln(C(P_T) - R)`, the
/// small-error-probability form of the total-power bound, as the root of
/// [`stationarity_residual`].
pub fn asymptotic_optimal_transmit_power(
    link: &LinkSpec,
    env: &RadioEnvironment,
    tech: &DecoderTech,
    kind: ChannelKind,
) -> Result<f64> {
    let p_sh = shannon_limit_transmit_power(link, env, kind)?;
    let xi_t = link.path_weight(env);
    let r_ch = link.spectral_rate(env);
    let gamma = tech.gamma(link, env);
    let cap = |p_t: f64| kind.capacity(p_t / xi_t, env);
    let residual = |u: f64| {
        stationarity_residual(p_sh * (1.0 + u.exp()), gamma, cap, r_ch).unwrap_or(f64::NEG_INFINITY)
    };
    // The residual tends to -inf at the Shannon limit and to 1 far above it.
    let mut lo = -30.0;
    while residual(lo) >= 0.0 {
        lo -= 10.0;
        if lo < -700.0 {
            return Err(Error::NoBracket { lo, hi: 30.0 });
        }
    }
    let mut hi = lo + 10.0;
    while residual(hi) <= 0.0 {
        hi += 10.0;
        if hi > 700.0 {
            return Err(Error::NoBracket { lo, hi });
        }
    }
    let cfg = SolverConfig::default().with_tolerances(1e-12, 1e-14);
    let u = bisect_monotone(residual, 0.0, lo, hi, &cfg)?;
    Ok(p_sh * (1.0 + u.exp()))
}

/// One optimized row per target error probability, in input order. Rows that
/// fail carry their error.
pub fn waterslide_sweep(
    pe_grid: &[f64],
    link: &LinkSpec,
    env: &RadioEnvironment,
    tech: &DecoderTech,
    kind: ChannelKind,
    search: &PowerSearch,
) -> Vec<Result<BoundPoint>> {
    pe_grid
        .par_iter()
        .map(|&pe| {
            let mut l = *link;
            l.target_pe = pe;
            l.validate()?;
            optimize_transmit_power(&l, env, tech, kind, search)
        })
        .collect()
}
