//! Regular LDPC ensembles under Gallager-B decoding on the hard-decision
//! BSC. Density evolution gives the iteration count for each crossover, and
//! from that the total power achieved with a whole number of iterations.
//!
//! Message error probabilities are tracked as logarithms throughout, so
//! targets far below the smallest positive `f64` are reachable.

use rayon::prelude::*;

use crate::channel::{qpsk_hard_decision_crossover, LinkSpec, RadioEnvironment};
use crate::error::{ensure_positive, Error, Result};
use crate::math::q_function_inverse;
use crate::power::{optimize_transmit_power, ChannelKind, DecoderTech, PowerSearch};

/// Below this message error probability the step switches to its
/// small-argument form in the log domain.
const LOG_DOMAIN_BELOW: f64 = 1e-280;
/// Density evolution is declared converged once the message error
/// probability falls below this value.
const CONVERGED_BELOW: f64 = 1e-30;
const MAX_ITERATIONS: usize = 1_000_000;

/// A `(d_v, d_c)`-regular ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RegularEnsemble {
    pub variable_degree: u32,
    pub check_degree: u32,
}

impl RegularEnsemble {
    pub fn new(variable_degree: u32, check_degree: u32) -> Result<Self> {
        let e = Self {
            variable_degree,
            check_degree,
        };
        e.validate()?;
        Ok(e)
    }

    /// The `(3, 4)` ensemble, rate 1/4.
    pub fn three_four() -> Self {
        Self {
            variable_degree: 3,
            check_degree: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.variable_degree < 3 {
            return Err(Error::InvalidParameter {
                name: "variable_degree",
                reason: format!("must be at least 3, got {}", self.variable_degree),
            });
        }
        if self.check_degree <= self.variable_degree {
            return Err(Error::InvalidParameter {
                name: "check_degree",
                reason: format!(
                    "must exceed the variable degree {}, got {}",
                    self.variable_degree, self.check_degree
                ),
            });
        }
        Ok(())
    }

    pub fn design_rate(&self) -> f64 {
        1.0 - f64::from(self.variable_degree) / f64::from(self.check_degree)
    }

    /// Processing elements per channel output: one variable node plus
    /// `d_v / d_c` check nodes.
    pub fn nodes_per_output(&self) -> f64 {
        1.0 + f64::from(self.variable_degree) / f64::from(self.check_degree)
    }

    /// Gallager's flip threshold: the smallest `b` in `((d_v - 1)/2, d_v - 1]`
    /// with `(1 - p0)/p0 <= ((1 + s)/(1 - s))^(2b - d_v + 1)`, where
    /// `s = (1 - 2x)^(d_c - 1)`. Always `2` for `d_v = 3`.
    pub fn flip_threshold(&self, x: f64, p0: f64) -> u32 {
        let dv = self.variable_degree;
        let s = (1.0 - 2.0 * x).powi(self.check_degree as i32 - 1);
        let lhs = ((1.0 - p0) / p0).ln();
        let base = ((1.0 + s) / (1.0 - s)).ln();
        let first = dv / 2;
        ((first.max(1))..dv)
            .find(|&b| b * 2 > dv - 1 && lhs <= f64::from(2 * b + 1 - dv) * base)
            .unwrap_or(dv - 1)
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

fn ln_binomial(n: u32, k: u32) -> f64 {
    (0..k).map(|i| f64::from(n - i).ln() - f64::from(i + 1).ln()).sum()
}

/// One density-evolution step on `ln x`, the log message error probability.
pub fn gallager_b_step_ln(ln_x: f64, p0: f64, ens: &RegularEnsemble) -> f64 {
    let dc1 = f64::from(ens.check_degree - 1);
    // a: probability that a check-to-variable message is wrong.
    let (ln_a, ln_q) = if ln_x == f64::NEG_INFINITY {
        (f64::NEG_INFINITY, 0.0)
    } else if ln_x < LOG_DOMAIN_BELOW.ln() {
        (dc1.ln() + ln_x, 0.0)
    } else {
        let a = -(dc1 * (-2.0 * ln_x.exp()).ln_1p()).exp_m1() / 2.0;
        (a.ln(), (-a).ln_1p())
    };
    let x = ln_x.exp();
    let b = ens.flip_threshold(x, p0);
    let m = ens.variable_degree - 1;
    // Channel bit wrong and fewer than b incoming messages correct it.
    let stays: Vec<f64> = (0..b)
        .map(|k| ln_binomial(m, k) + f64::from(k) * ln_q + f64::from(m - k) * ln_a)
        .collect();
    // Channel bit right and at least b incoming messages overturn it.
    let flips: Vec<f64> = (b..=m)
        .map(|k| ln_binomial(m, k) + f64::from(k) * ln_a + f64::from(m - k) * ln_q)
        .collect();
    let wrong = if p0 > 0.0 { p0.ln() + log_sum_exp(&stays) } else { f64::NEG_INFINITY };
    let right = (-p0).ln_1p() + log_sum_exp(&flips);
    log_sum_exp(&[wrong, right])
}

/// One density-evolution step on the message error probability `x`.
///
/// For `d_v = 3` this is
/// `p0 (1 - q^2) + (1 - p0) (1 - q)^2` with `q = (1 + (1 - 2x)^(d_c - 1)) / 2`.
pub fn gallager_b_step(x: f64, p0: f64, ens: &RegularEnsemble) -> Result<f64> {
    for (name, v) in [("message_error", x), ("crossover", p0)] {
        if !(0.0..=0.5).contains(&v) {
            return Err(Error::Domain {
                name,
                value: v,
                expected: "[0, 1/2]",
            });
        }
    }
    Ok(gallager_b_step_ln(x.ln(), p0, ens).exp())
}

/// Density-evolution trajectory from `x_0 = p0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeTrajectory {
    pub channel_crossover: f64,
    /// `ln x_l` for `l = 0, 1, ...`.
    pub ln_message_error: Vec<f64>,
    pub converged: bool,
}

impl DeTrajectory {
    /// Runs until `x_l <= target_pe`, a fixed point, or `max_iterations`.
    pub fn run(p0: f64, target_pe: f64, ens: &RegularEnsemble, max_iterations: usize) -> Self {
        let ln_target = target_pe.ln();
        let mut ln_x = p0.ln();
        let mut seq = vec![ln_x];
        let mut converged = ln_x <= ln_target;
        while !converged && seq.len() <= max_iterations {
            let next = gallager_b_step_ln(ln_x, p0, ens);
            if !(next < ln_x) {
                break;
            }
            ln_x = next;
            seq.push(ln_x);
            converged = ln_x <= ln_target;
        }
        Self {
            channel_crossover: p0,
            ln_message_error: seq,
            converged,
        }
    }

    pub fn iterations_to_target(&self) -> Option<usize> {
        self.converged.then(|| self.ln_message_error.len() - 1)
    }
}

/// True when density evolution from `p0` drives the message error to zero.
fn decodes(p0: f64, ens: &RegularEnsemble) -> bool {
    p0 == 0.0 || DeTrajectory::run(p0, CONVERGED_BELOW, ens, MAX_ITERATIONS).converged
}

/// Largest crossover from which density evolution converges to zero,
/// to `1e-10` by bisection.
pub fn de_threshold(ens: &RegularEnsemble) -> Result<f64> {
    ens.validate()?;
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if decodes(mid, ens) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Smallest `l` with `x_l <= target_pe`, starting at `x_0 = p0`.
pub fn iterations_to_pe(p0: f64, target_pe: f64, ens: &RegularEnsemble) -> Result<u32> {
    ens.validate()?;
    if !(0.0..=0.5).contains(&p0) {
        return Err(Error::Domain {
            name: "crossover",
            value: p0,
            expected: "[0, 1/2]",
        });
    }
    if !(target_pe > 0.0 && target_pe < 1.0) {
        return Err(Error::Domain {
            name: "target_pe",
            value: target_pe,
            expected: "(0, 1)",
        });
    }
    if p0 <= target_pe {
        return Ok(0);
    }
    let traj = DeTrajectory::run(p0, target_pe, ens, MAX_ITERATIONS);
    match traj.iterations_to_target() {
        Some(l) => Ok(l as u32),
        None if traj.ln_message_error.len() > MAX_ITERATIONS => Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
        }),
        None => Err(Error::AboveThreshold {
            crossover: p0,
            threshold: de_threshold(ens)?,
        }),
    }
}

/// `x` with `Q(x) = p`, for `p` in `(0, 1/2]`.
/// One row of the achieved LDPC curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdpcPoint {
    pub target_pe: f64,
    pub transmit_power: f64,
    pub received_power: f64,
    pub crossover: f64,
    pub iterations: u32,
    /// Unweighted decoding power of all variable and check node PEs.
    pub decode_power: f64,
    pub total_power: f64,
}

/// Context shared by the points of one achieved-power sweep.
#[derive(Debug, Clone, Copy)]
pub struct LdpcLink {
    pub link: LinkSpec,
    pub env: RadioEnvironment,
    pub tech: DecoderTech,
    pub ensemble: RegularEnsemble,
}

impl LdpcLink {
    fn crossover(&self, p_t: f64) -> f64 {
        qpsk_hard_decision_crossover(self.link.received_power(p_t, &self.env), &self.env)
    }

    /// Transmit power whose crossover equals `p0`.
    fn power_for_crossover(&self, p0: f64) -> Result<f64> {
        let z = q_function_inverse(p0)?;
        Ok(self.link.path_weight(&self.env) * self.env.noise_power() * z * z)
    }

    /// Decoding power per iteration, unweighted.
    fn power_per_iteration(&self) -> f64 {
        let r_ch = self.link.spectral_rate(&self.env);
        self.tech.node_energy * self.ensemble.nodes_per_output() * self.tech.decode_rate(&self.link) / r_ch
    }

    fn point(&self, target_pe: f64, p_t: f64, l: u32) -> LdpcPoint {
        let p_d = self.power_per_iteration() * f64::from(l);
        LdpcPoint {
            target_pe,
            transmit_power: p_t,
            received_power: self.link.received_power(p_t, &self.env),
            crossover: self.crossover(p_t),
            iterations: l,
            decode_power: p_d,
            total_power: p_t + self.tech.decode_weight * p_d,
        }
    }

    /// Smallest transmit power at which `l` iterations reach `target_pe`.
    ///
    /// `x_l` is increasing in the crossover, so this is a bisection on the
    /// crossover between 0 and `upper` (a crossover known to need more than
    /// `l` iterations, or the threshold).
    fn min_power_for(&self, l: u32, target_pe: f64, upper: f64) -> Result<f64> {
        let reaches = |p0: f64| {
            let traj = DeTrajectory::run(p0, target_pe, &self.ensemble, l as usize);
            traj.converged && traj.ln_message_error.len() <= l as usize + 1
        };
        let (mut lo, mut hi) = (0.0_f64, upper);
        while hi - lo > 1e-15 * hi.max(1e-300) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if reaches(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo == 0.0 {
            return Err(Error::Infeasible(format!("{l} iterations cannot reach {target_pe}")));
        }
        // The crossover-to-power inversion is not exact; nudge upward until
        // the power itself reaches the target in l iterations.
        let mut p_t = self.power_for_crossover(lo)?;
        for _ in 0..1000 {
            if reaches(self.crossover(p_t)) {
                return Ok(p_t);
            }
            p_t *= 1.0 + 1e-13;
        }
        Err(Error::NoConvergence { iterations: 1000 })
    }

    /// Best total power over integer iteration counts.
    ///
    /// For each `l` the cheapest transmit power is the one whose crossover
    /// makes `x_l` hit the target exactly, so the minimum over `P_T` is a
    /// minimum over `l` of that power plus `l` iterations of decoding. Since
    /// every `P_T` is at least the threshold power, `l` stops growing once
    /// the decoding term alone exceeds the best total found.
    pub fn optimize(&self, target_pe: f64, threshold: f64) -> Result<LdpcPoint> {
        let floor = self.power_for_crossover(threshold)?;
        let per_iter = self.tech.decode_weight * self.power_per_iteration();
        let mut best: Option<LdpcPoint> = None;
        let mut upper = threshold;
        for l in 0..MAX_ITERATIONS as u32 {
            if let Some(b) = &best {
                if floor + per_iter * f64::from(l) >= b.total_power {
                    break;
                }
            }
            let p_t = if l == 0 {
                let mut p = self.power_for_crossover(target_pe.min(0.5))?;
                while self.crossover(p) > target_pe {
                    p *= 1.0 + 1e-13;
                }
                p
            } else {
                match self.min_power_for(l, target_pe, upper) {
                    Ok(p) => p,
                    Err(Error::Infeasible(_)) => continue,
                    Err(e) => return Err(e),
                }
            };
            upper = self.crossover(p_t).max(upper.min(threshold));
            let candidate = self.point(target_pe, p_t, l);
            if best.is_none_or(|b| candidate.total_power < b.total_power) {
                best = Some(candidate);
            }
        }
        best.ok_or_else(|| Error::Infeasible("no iteration count reaches the target".into()))
    }
}

/// Achieved curve with the converse curve alongside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdpcComparison {
    pub achieved: LdpcPoint,
    pub converse_total_power: f64,
    pub gap_db: f64,
}

/// For each target, the optimized LDPC operating point and the BSC total
/// power lower bound at the same target. Rows come back in input order.
pub fn ldpc_waterslide(
    pe_grid: &[f64],
    ctx: &LdpcLink,
    search: &PowerSearch,
) -> Result<Vec<Result<LdpcComparison>>> {
    ctx.ensemble.validate()?;
    ctx.tech.validate()?;
    ensure_positive("distance", ctx.link.distance)?;
    let threshold = de_threshold(&ctx.ensemble)?;
    Ok(pe_grid
        .par_iter()
        .map(|&pe| {
            let mut link = ctx.link;
            link.target_pe = pe;
            link.validate()?;
            let local = LdpcLink { link, ..*ctx };
            let achieved = local.optimize(pe, threshold)?;
            let converse = optimize_transmit_power(&link, &ctx.env, &ctx.tech, ChannelKind::Bsc, search)?;
            Ok(LdpcComparison {
                achieved,
                converse_total_power: converse.total_power,
                gap_db: db(achieved.total_power / converse.total_power),
            })
        })
        .collect())
}

pub fn db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Loss from counting check-node PEs: `10 log10(1 + d_v/d_c)` dB.
pub fn check_node_loss_db(ens: &RegularEnsemble) -> f64 {
    db(ens.nodes_per_output())
}

/// Loss from slower neighborhood growth: `10 log10(log2(reached_bound) / log2(reached_code))` dB.
pub fn neighborhood_growth_loss_db(reached_by_bound: f64, reached_by_code: f64) -> f64 {
    db(reached_by_bound.log2() / reached_by_code.log2())
}
