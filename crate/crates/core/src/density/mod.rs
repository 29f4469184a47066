//! Maximum density of simultaneously active links on a triangular grid.
//!
//! Every link has the same transmit power, so the aggregate interference is
//! `P_T * I_1(d)` where `I_1` is the interference per watt. Each density
//! question then reduces to "SINR >= s" for some required `s`, which is the
//! same as `I_1(d) <= g/s - N/P_T` (`g` the signal path gain, `N` the per-band
//! noise). [`SpacingSolver`] answers the smallest spacing meeting such a
//! budget for a fixed link layout and caches `I_1` on a log grid of spacings.
//!
//! With `B` sub-bands, each band carries its own copy of the grid, so the
//! reported `density` is `B` times the same-band grid density.

mod lattice;

pub use lattice::{grid_density, unit_interference, unit_interference_brute_force, Geometry, InterferenceWindow};

use rayon::prelude::*;

use crate::channel::{received_power, thermal_noise_power, RadioEnvironment};
use crate::converse::{BoundProfile, ConverseChannel};
use crate::error::{ensure_positive, Error, Result};
use crate::math::{binary_entropy, golden_section, log_space, q_function, q_function_inverse, SolverConfig};
use crate::power::{decoding_power_lower_bound, iterations_lower_bound, DecoderTech};

/// A fully specified grid: the link layout at one spacing and band count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridScenario {
    pub spacing: f64,
    pub orientation: f64,
    pub link_distance: f64,
    pub sub_bands: u32,
    pub env: RadioEnvironment,
    pub data_rate: f64,
    pub window: InterferenceWindow,
}

impl GridScenario {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("spacing", self.spacing)?;
        ensure_positive("link_distance", self.link_distance)?;
        ensure_positive("data_rate", self.data_rate)?;
        if self.sub_bands == 0 {
            return Err(Error::InvalidParameter {
                name: "sub_bands",
                reason: "must be at least 1".into(),
            });
        }
        if !self.orientation.is_finite() {
            return Err(Error::InvalidParameter {
                name: "orientation",
                reason: "must be finite".into(),
            });
        }
        self.env.validate()
    }

    pub fn geometry(&self) -> Geometry {
        Geometry {
            spacing: self.spacing,
            orientation: self.orientation,
            link_distance: self.link_distance,
        }
    }

    pub fn same_band_density(&self) -> f64 {
        grid_density(self.spacing)
    }

    pub fn density(&self) -> f64 {
        f64::from(self.sub_bands) * self.same_band_density()
    }

    /// `kTW/B`.
    pub fn noise_power(&self) -> Result<f64> {
        thermal_noise_power(&self.env, self.sub_bands)
    }

    pub fn signal_power(&self, p_t: f64) -> f64 {
        received_power(p_t, self.link_distance, &self.env)
    }

    pub fn sinr(&self, p_t: f64) -> Result<f64> {
        let i = interference_sum(p_t, self)?;
        Ok(self.signal_power(p_t) / (self.noise_power()? + i))
    }
}

/// Total interference at the receiver when every grid transmitter sends `p_t`.
pub fn interference_sum(p_t: f64, scenario: &GridScenario) -> Result<f64> {
    if !(p_t >= 0.0 && p_t.is_finite()) {
        return Err(Error::Domain {
            name: "transmit_power",
            value: p_t,
            expected: "[0, inf)",
        });
    }
    scenario.validate()?;
    let unit = unit_interference(&scenario.geometry(), &scenario.env, &scenario.window)?;
    Ok(p_t * unit)
}

/// `B = W / R_data`, rounded down.
pub fn uncoded_sub_bands(env: &RadioEnvironment, data_rate: f64) -> Result<u32> {
    ensure_positive("data_rate", data_rate)?;
    let b = (env.bandwidth / data_rate * (1.0 + 1e-12)).floor();
    if b < 1.0 {
        return Err(Error::InvalidParameter {
            name: "sub_bands",
            reason: format!("data rate {data_rate} exceeds bandwidth {}", env.bandwidth),
        });
    }
    Ok(b as u32)
}

/// Uncoded QPSK bit-error probability `Q(sqrt(2 SINR))` on the grid.
pub fn uncoded_pe(p_t: f64, scenario: &GridScenario) -> Result<f64> {
    uncoded_sub_bands(&scenario.env, scenario.data_rate)?;
    Ok(q_function((2.0 * scenario.sinr(p_t)?).sqrt()))
}

/// SINR at which `Q(sqrt(2 s))` equals `target_pe`; zero when the target is vacuous.
pub fn uncoded_required_sinr(target_pe: f64) -> Result<f64> {
    check_pe(target_pe)?;
    if target_pe >= 0.5 {
        return Ok(0.0);
    }
    let z = q_function_inverse(target_pe)?;
    Ok(0.5 * z * z)
}

/// SINR at which `(W/B) log2(1 + s/gap) = R_data (1 - h_b(target_pe))`.
pub fn coded_required_sinr(target_pe: f64, sub_bands: u32, gap_db: f64, env: &RadioEnvironment, data_rate: f64) -> Result<f64> {
    check_pe(target_pe)?;
    if !(gap_db >= 0.0 && gap_db.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "gap_db",
            reason: format!("must be finite and >= 0, got {gap_db}"),
        });
    }
    let per_band = data_rate * (1.0 - binary_entropy(target_pe.min(0.5))) * f64::from(sub_bands) / env.bandwidth;
    Ok(10f64.powf(gap_db / 10.0) * (per_band * std::f64::consts::LN_2).exp_m1())
}

fn check_pe(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain {
            name: "target_pe",
            value: p,
            expected: "(0, 1]",
        });
    }
    Ok(())
}

/// Everything about a link except the grid spacing and band count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkLayout {
    pub link_distance: f64,
    pub orientation: f64,
    pub data_rate: f64,
    pub env: RadioEnvironment,
    /// Smallest admissible same-band spacing; one wavelength when unset.
    pub min_spacing: Option<f64>,
    pub window: InterferenceWindow,
}

impl LinkLayout {
    pub fn new(link_distance: f64, data_rate: f64, env: RadioEnvironment) -> Result<Self> {
        let layout = Self {
            link_distance,
            orientation: 0.0,
            data_rate,
            env,
            min_spacing: None,
            window: InterferenceWindow::default(),
        };
        layout.validate()?;
        Ok(layout)
    }

    /// 1 m links at 1.5 Gbps in the 60 GHz band, receiver along the grid axis.
    pub fn short_range() -> Self {
        Self {
            link_distance: 1.0,
            orientation: 0.0,
            data_rate: 1.5e9,
            env: RadioEnvironment::sixty_ghz(),
            min_spacing: None,
            window: InterferenceWindow::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario(1.0, 1).validate()?;
        if let Some(d) = self.min_spacing {
            ensure_positive("min_spacing", d)?;
        }
        if !(self.window.width > 0.0 && self.window.cutoff >= 4.0) {
            return Err(Error::InvalidParameter {
                name: "window",
                reason: "width must be > 0 and cutoff >= 4".into(),
            });
        }
        Ok(())
    }

    pub fn spacing_floor(&self) -> f64 {
        self.min_spacing.unwrap_or_else(|| self.env.wavelength())
    }

    pub fn scenario(&self, spacing: f64, sub_bands: u32) -> GridScenario {
        GridScenario {
            spacing,
            orientation: self.orientation,
            link_distance: self.link_distance,
            sub_bands,
            env: self.env,
            data_rate: self.data_rate,
            window: self.window,
        }
    }

    /// Received power per transmitted watt over the link distance.
    pub fn signal_gain(&self) -> f64 {
        received_power(1.0, self.link_distance, &self.env)
    }

    /// `ceil(W / R_data) * 8`.
    pub fn default_band_cap(&self) -> u32 {
        ((self.env.bandwidth / self.data_rate).ceil() as u32).max(1) * 8
    }
}

/// Sub-band choice for coded transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubBands {
    Fixed(u32),
    /// Try `1..=max` and keep the densest.
    Scan { max: u32 },
}

impl SubBands {
    fn range(self) -> Result<std::ops::RangeInclusive<u32>> {
        let (lo, hi) = match self {
            SubBands::Fixed(b) => (b, b),
            SubBands::Scan { max } => (1, max),
        };
        if lo == 0 || hi == 0 {
            return Err(Error::InvalidParameter {
                name: "sub_bands",
                reason: "must be at least 1".into(),
            });
        }
        Ok(lo..=hi)
    }
}

/// Transmission scheme for the infinite-power density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transmission {
    Uncoded,
    Coded { gap_db: f64, sub_bands: SubBands },
}

/// One maximum-density answer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPoint {
    /// Same-band spacing `d`; infinite when infeasible.
    pub spacing: f64,
    pub sub_bands: u32,
    /// `2 / (sqrt(3) d^2)`.
    pub same_band_density: f64,
    /// Pairs per square metre over all bands.
    pub density: f64,
    pub transmit_power: f64,
    pub total_power: f64,
    /// SINR achieved at `spacing`.
    pub sinr: f64,
    pub required_sinr: f64,
    pub feasible: bool,
    /// The spacing sits on the geometric floor rather than on the SINR constraint.
    pub at_spacing_floor: bool,
}

impl DensityPoint {
    fn infeasible(transmit_power: f64, total_power: f64, sub_bands: u32, required_sinr: f64) -> Self {
        Self {
            spacing: f64::INFINITY,
            sub_bands,
            same_band_density: 0.0,
            density: 0.0,
            transmit_power,
            total_power,
            sinr: 0.0,
            required_sinr,
            feasible: false,
            at_spacing_floor: false,
        }
    }
}

const GRID_PER_DECADE: usize = 48;
const GRID_DECADES: usize = 6;
const MAX_SPACING: f64 = 1e9;

/// Smallest spacing meeting an interference budget, for one link layout.
#[derive(Debug, Clone)]
pub struct SpacingSolver {
    layout: LinkLayout,
    /// `(d, I_1(d))`, log-spaced from the spacing floor.
    grid: Vec<(f64, f64)>,
}

impl SpacingSolver {
    pub fn new(layout: LinkLayout) -> Result<Self> {
        layout.validate()?;
        let floor = layout.spacing_floor();
        let points = GRID_PER_DECADE * GRID_DECADES + 1;
        let spacings = log_space(floor, floor * 10f64.powi(GRID_DECADES as i32), points);
        let grid = spacings
            .par_iter()
            .map(|&d| Ok((d, unit_at(&layout, d)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { layout, grid })
    }

    pub fn layout(&self) -> &LinkLayout {
        &self.layout
    }

    /// Interference per watt at spacing `d`; infinite for a receiver sitting
    /// on an interferer.
    pub fn unit_interference(&self, spacing: f64) -> Result<f64> {
        unit_at(&self.layout, spacing)
    }

    /// Smallest spacing `d >= floor` with `I_1(d) <= budget`, and whether it
    /// is the floor itself. `None` when the budget is not positive.
    ///
    /// The cached grid locates the first admissible spacing; bisection then
    /// shrinks the bracket below it to `1e-12` relative.
    pub fn min_spacing(&self, budget: f64) -> Result<Option<(f64, bool)>> {
        if budget.is_nan() || budget <= 0.0 {
            return Ok(None);
        }
        let (floor, at_floor) = self.grid[0];
        if at_floor <= budget {
            return Ok(Some((floor, true)));
        }
        let mut below = floor;
        let mut above = None;
        for &(d, v) in &self.grid[1..] {
            if v <= budget {
                above = Some(d);
                break;
            }
            below = d;
        }
        let mut hi = match above {
            Some(d) => d,
            None => {
                let mut d = below;
                loop {
                    d *= 2.0;
                    if d > MAX_SPACING {
                        return Err(Error::NoBracket { lo: below, hi: d });
                    }
                    if self.unit_interference(d)? <= budget {
                        break d;
                    }
                    below = d;
                }
            }
        };
        let mut lo = below;
        while hi - lo > 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.unit_interference(mid)? <= budget {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Some((hi, false)))
    }

    /// Densest grid on `sub_bands` bands whose SINR reaches `required_sinr`
    /// at transmit power `p_t`.
    pub fn max_density(&self, required_sinr: f64, p_t: f64, sub_bands: u32) -> Result<DensityPoint> {
        if sub_bands == 0 {
            return Err(Error::InvalidParameter {
                name: "sub_bands",
                reason: "must be at least 1".into(),
            });
        }
        if !(required_sinr >= 0.0) {
            return Err(Error::Domain {
                name: "required_sinr",
                value: required_sinr,
                expected: "[0, inf)",
            });
        }
        if !(p_t > 0.0) {
            return Ok(DensityPoint::infeasible(p_t.max(0.0), p_t.max(0.0), sub_bands, required_sinr));
        }
        let g = self.layout.signal_gain();
        let noise = thermal_noise_power(&self.layout.env, sub_bands)?;
        let budget = if required_sinr == 0.0 {
            f64::INFINITY
        } else {
            g / required_sinr - noise / p_t
        };
        let Some((spacing, at_floor)) = self.min_spacing(budget)? else {
            return Ok(DensityPoint::infeasible(p_t, p_t, sub_bands, required_sinr));
        };
        let same_band = grid_density(spacing);
        let interference = p_t * self.unit_interference(spacing)?;
        Ok(DensityPoint {
            spacing,
            sub_bands,
            same_band_density: same_band,
            density: f64::from(sub_bands) * same_band,
            transmit_power: p_t,
            total_power: p_t,
            sinr: g * p_t / (noise + interference),
            required_sinr,
            feasible: true,
            at_spacing_floor: at_floor,
        })
    }
}

fn unit_at(layout: &LinkLayout, spacing: f64) -> Result<f64> {
    let geometry = layout.scenario(spacing, 1).geometry();
    match unit_interference(&geometry, &layout.env, &layout.window) {
        Err(Error::DegenerateGeometry { .. }) => Ok(f64::INFINITY),
        other => other,
    }
}

/// Uncoded QPSK on `B = W/R_data` bands at transmit power `p_t`.
pub fn uncoded_max_density(target_pe: f64, p_t: f64, solver: &SpacingSolver) -> Result<DensityPoint> {
    let layout = solver.layout();
    let b = uncoded_sub_bands(&layout.env, layout.data_rate)?;
    solver.max_density(uncoded_required_sinr(target_pe)?, p_t, b)
}

/// Coded transmission at `gap_db` from capacity, treating interference as noise.
pub fn coded_max_density(
    target_pe: f64,
    p_t: f64,
    solver: &SpacingSolver,
    sub_bands: SubBands,
    gap_db: f64,
) -> Result<DensityPoint> {
    let layout = solver.layout();
    let mut best: Option<DensityPoint> = None;
    for b in sub_bands.range()? {
        let s = coded_required_sinr(target_pe, b, gap_db, &layout.env, layout.data_rate)?;
        let point = solver.max_density(s, p_t, b)?;
        if best.is_none_or(|cur| point.density > cur.density) {
            best = Some(point);
        }
    }
    Ok(best.expect("band range is never empty"))
}

fn max_density_for(mode: Transmission, target_pe: f64, p_t: f64, solver: &SpacingSolver) -> Result<DensityPoint> {
    match mode {
        Transmission::Uncoded => uncoded_max_density(target_pe, p_t, solver),
        Transmission::Coded { gap_db, sub_bands } => coded_max_density(target_pe, p_t, solver, sub_bands, gap_db),
    }
}

/// Density as transmit power grows without bound: transmit power steps up by
/// decades from 1 microwatt until consecutive feasible densities agree to 1e-4.
pub fn infinite_power_density(target_pe: f64, solver: &SpacingSolver, mode: Transmission) -> Result<DensityPoint> {
    let mut prev: Option<DensityPoint> = None;
    for k in 0..=30 {
        let p_t = 1e-6 * 10f64.powi(k);
        let point = max_density_for(mode, target_pe, p_t, solver)?;
        if let Some(p) = prev.filter(|p| p.feasible && point.feasible) {
            if (point.density - p.density).abs() <= 1e-4 * point.density {
                return Ok(point);
            }
        }
        prev = Some(point);
    }
    match prev {
        Some(p) if !p.feasible => Err(Error::Infeasible(format!(
            "target Pe {target_pe} unreachable at any transmit power"
        ))),
        _ => Err(Error::NoConvergence { iterations: 31 }),
    }
}

/// Uncoded density against total power (uncoded transmission spends nothing on decoding).
pub fn uncoded_density_curve(target_pe: f64, power_grid: &[f64], solver: &SpacingSolver) -> Vec<Result<DensityPoint>> {
    power_grid
        .par_iter()
        .map(|&budget| uncoded_max_density(target_pe, budget, solver))
        .collect()
}

/// A concrete code and decoder: required SINR at its operating rate, and its
/// decoding cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PracticalCode {
    /// Linear SINR needed to reach the target error probability.
    pub required_sinr: f64,
    /// Bits per real channel use.
    pub code_rate: f64,
    pub node_energy: f64,
    pub iterations: u32,
}

impl PracticalCode {
    /// 5.5 dB at rate 0.8125 with 3 pJ per node, eight iterations.
    pub fn reference() -> Self {
        Self {
            required_sinr: 10f64.powf(0.55),
            code_rate: 0.8125,
            node_energy: 3e-12,
            iterations: 8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("required_sinr", self.required_sinr)?;
        ensure_positive("code_rate", self.code_rate)?;
        ensure_positive("node_energy", self.node_energy)?;
        Ok(())
    }

    /// Most bands that still carry `R_data` at this code rate: `floor(2W rate / R_data)`.
    pub fn sub_bands(&self, env: &RadioEnvironment, data_rate: f64) -> Result<u32> {
        let b = (2.0 * env.bandwidth * self.code_rate / data_rate * (1.0 + 1e-12)).floor();
        if b < 1.0 {
            return Err(Error::Infeasible(format!(
                "code rate {} cannot carry {data_rate} bit/s in {} Hz",
                self.code_rate, env.bandwidth
            )));
        }
        Ok(b as u32)
    }

    /// `E_node l R_data / rate`.
    pub fn decode_power(&self, data_rate: f64) -> Result<f64> {
        let tech = DecoderTech::new(self.node_energy, 2)?;
        decoding_power_lower_bound(f64::from(self.iterations), &tech, data_rate, self.code_rate)
    }
}

/// Practical-code density against total power budget.
pub fn practical_code_density_curve(
    code: &PracticalCode,
    power_grid: &[f64],
    solver: &SpacingSolver,
) -> Result<Vec<DensityPoint>> {
    code.validate()?;
    let layout = solver.layout();
    let b = code.sub_bands(&layout.env, layout.data_rate)?;
    let p_d = code.decode_power(layout.data_rate)?;
    power_grid
        .par_iter()
        .map(|&budget| {
            ensure_positive("power budget", budget)?;
            let p_t = budget - p_d;
            let mut point = if p_t > 0.0 {
                solver.max_density(code.required_sinr, p_t, b)?
            } else {
                DensityPoint::infeasible(0.0, budget, b, code.required_sinr)
            };
            point.total_power = budget;
            Ok(point)
        })
        .collect()
}

/// One row of the converse-based density upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperBoundPoint {
    pub point: DensityPoint,
    /// SINR the bound is evaluated at (the optimizer).
    pub design_sinr: f64,
    /// `R_data B / (2W)`.
    pub spectral_rate: f64,
    /// `2^(2 R_ch) - 1`.
    pub shannon_min_sinr: f64,
    /// `log2(1 + s)/2` at the design SINR.
    pub capacity: f64,
    /// `10 log10(s / s_min)`.
    pub gap_db: f64,
    pub neighborhood: f64,
    pub iterations: f64,
    /// Weighted decoding power.
    pub decode_power: f64,
}

/// Excess-SINR samples per band count in the upper-bound search.
const UPPER_BOUND_GRID: usize = 96;

struct BandTable {
    bands: u32,
    r_ch: f64,
    s_min: f64,
    noise: f64,
    /// `(s, n, l, P_D)` for increasing `s`.
    rows: Vec<(f64, f64, f64, f64)>,
}

fn decode_cost(s: f64, r_ch: f64, target_pe: f64, tech: &DecoderTech, decode_rate: f64) -> Result<(f64, f64, f64)> {
    let channel = ConverseChannel::awgn(s, 1.0, r_ch)?;
    let n = BoundProfile::new(channel)?.min_neighborhood(target_pe)?.neighborhood;
    let l = iterations_lower_bound(n, tech.max_degree)?;
    let p_d = tech.decode_weight * decoding_power_lower_bound(l.max(1.0), tech, decode_rate, r_ch)?;
    Ok((n, l, p_d))
}

/// Upper bound on the density any code can reach at each total-power budget,
/// when decoding costs at least the converse bound on iterations (and at
/// least one iteration).
///
/// For a design SINR `s` on `B` bands the decoder needs
/// `P_D(s) = xi_D max(1, l_min(s)) E_node R_dec / R_ch`, leaving
/// `P_T = budget - P_D(s)` and an interference allowance `g/s - N/P_T`. The
/// smallest admissible spacing is nonincreasing in that allowance, so for each
/// `B` the allowance is maximized over `s` and the densest band count wins.
pub fn optimal_code_density_upper_bound(
    power_grid: &[f64],
    solver: &SpacingSolver,
    tech: &DecoderTech,
    target_pe: f64,
    sub_bands: SubBands,
) -> Result<Vec<Result<UpperBoundPoint>>> {
    tech.validate()?;
    check_pe(target_pe)?;
    for &b in power_grid {
        ensure_positive("power budget", b)?;
    }
    let Some(max_budget) = power_grid.iter().copied().reduce(f64::max) else {
        return Ok(Vec::new());
    };
    let layout = solver.layout();
    let g = layout.signal_gain();
    let decode_rate = tech.decode_throughput.unwrap_or(layout.data_rate);

    let tables = sub_bands
        .range()?
        .map(|b| {
            let r_ch = layout.data_rate * f64::from(b) / (2.0 * layout.env.bandwidth);
            let s_min = (2.0 * r_ch).exp2() - 1.0;
            let noise = thermal_noise_power(&layout.env, b)?;
            let s_max = g * max_budget / noise;
            let rows = if s_max > s_min * (1.0 + 2e-6) {
                log_space(1e-6, s_max / s_min - 1.0, UPPER_BOUND_GRID)
                    .par_iter()
                    .map(|&excess| {
                        let s = s_min * (1.0 + excess);
                        let (n, l, p_d) = decode_cost(s, r_ch, target_pe, tech, decode_rate)?;
                        Ok((s, n, l, p_d))
                    })
                    .collect::<Result<Vec<_>>>()?
            } else {
                Vec::new()
            };
            Ok(BandTable {
                bands: b,
                r_ch,
                s_min,
                noise,
                rows,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(power_grid
        .par_iter()
        .map(|&budget| upper_bound_at(budget, solver, tech, target_pe, decode_rate, &tables))
        .collect())
}

fn upper_bound_at(
    budget: f64,
    solver: &SpacingSolver,
    tech: &DecoderTech,
    target_pe: f64,
    decode_rate: f64,
    tables: &[BandTable],
) -> Result<UpperBoundPoint> {
    let g = solver.layout().signal_gain();
    let allowance = |s: f64, p_d: f64, noise: f64| {
        let p_t = budget - p_d;
        if p_t > 0.0 {
            g / s - noise / p_t
        } else {
            f64::NEG_INFINITY
        }
    };

    // Best grid sample per band count, ranked by the density it yields.
    let mut best: Option<(UpperBoundPoint, usize, usize)> = None;
    for (t, table) in tables.iter().enumerate() {
        let Some((k, _)) = table
            .rows
            .iter()
            .enumerate()
            .map(|(k, &(s, _, _, p_d))| (k, allowance(s, p_d, table.noise)))
            .filter(|(_, a)| *a > 0.0)
            .max_by(|a, b| a.1.total_cmp(&b.1))
        else {
            continue;
        };
        let (s, n, l, p_d) = table.rows[k];
        let candidate = upper_bound_row(budget, s, n, l, p_d, table, solver)?;
        if best.as_ref().is_none_or(|(cur, _, _)| candidate.point.density > cur.point.density) {
            best = Some((candidate, t, k));
        }
    }
    let Some((grid_best, t, k)) = best else {
        let b = tables.first().map_or(1, |t| t.bands);
        return Ok(UpperBoundPoint {
            point: DensityPoint::infeasible(0.0, budget, b, f64::NAN),
            design_sinr: f64::NAN,
            spectral_rate: f64::NAN,
            shannon_min_sinr: f64::NAN,
            capacity: f64::NAN,
            gap_db: f64::NAN,
            neighborhood: f64::NAN,
            iterations: f64::NAN,
            decode_power: f64::NAN,
        });
    };

    // Refine the design SINR between the neighbouring grid samples.
    let table = &tables[t];
    let ln_excess = |s: f64| (s / table.s_min - 1.0).ln();
    let lo = ln_excess(table.rows[k.saturating_sub(1)].0);
    let hi = ln_excess(table.rows[(k + 1).min(table.rows.len() - 1)].0);
    if hi - lo < 1e-9 {
        return Ok(grid_best);
    }
    let cfg = SolverConfig::default().with_tolerances(1e-9, 1e-9);
    let mut objective = |u: f64| {
        let s = table.s_min * (1.0 + u.exp());
        match decode_cost(s, table.r_ch, target_pe, tech, decode_rate) {
            Ok((_, _, p_d)) => -allowance(s, p_d, table.noise),
            Err(_) => f64::INFINITY,
        }
    };
    let refined = golden_section(&mut objective, lo, hi, &cfg);
    let s = table.s_min * (1.0 + refined.x.exp());
    let (n, l, p_d) = decode_cost(s, table.r_ch, target_pe, tech, decode_rate)?;
    if allowance(s, p_d, table.noise) <= allowance(grid_best.design_sinr, grid_best.decode_power, table.noise) {
        return Ok(grid_best);
    }
    let candidate = upper_bound_row(budget, s, n, l, p_d, table, solver)?;
    Ok(if candidate.point.density >= grid_best.point.density {
        candidate
    } else {
        grid_best
    })
}

fn upper_bound_row(
    budget: f64,
    s: f64,
    n: f64,
    l: f64,
    p_d: f64,
    table: &BandTable,
    solver: &SpacingSolver,
) -> Result<UpperBoundPoint> {
    let mut point = solver.max_density(s, budget - p_d, table.bands)?;
    point.total_power = budget;
    Ok(UpperBoundPoint {
        point,
        design_sinr: s,
        spectral_rate: table.r_ch,
        shannon_min_sinr: table.s_min,
        capacity: 0.5 * s.ln_1p() / std::f64::consts::LN_2,
        gap_db: 10.0 * (s / table.s_min).log10(),
        neighborhood: n,
        iterations: l,
        decode_power: p_d,
    })
}

/// Smallest budget any code could work with on `B` bands: one weighted
/// iteration plus the isolated-link Shannon-limit transmit power.
pub fn upper_bound_budget_floor(solver: &SpacingSolver, tech: &DecoderTech, sub_bands: u32) -> Result<f64> {
    let layout = solver.layout();
    let decode_rate = tech.decode_throughput.unwrap_or(layout.data_rate);
    let r_ch = layout.data_rate * f64::from(sub_bands) / (2.0 * layout.env.bandwidth);
    let s_min = (2.0 * r_ch).exp2() - 1.0;
    let noise = thermal_noise_power(&layout.env, sub_bands)?;
    let one_iteration = tech.decode_weight * decoding_power_lower_bound(1.0, tech, decode_rate, r_ch)?;
    Ok(one_iteration + s_min * noise / layout.signal_gain())
}
