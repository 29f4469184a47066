//! Acceptance report: one PASS/FAIL line per criterion, then a summary.
//!
//! The report always runs to completion so a failing criterion does not hide
//! the others. It exits nonzero only when `WATERSLIDE_ACCEPTANCE_STRICT=1` is
//! set and some criterion failed.

use std::collections::VecDeque;
use std::f64::consts::LN_2;
use std::path::Path;
use std::process::Command as Process;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use waterslide_cli::Config;
use waterslide_core::channel::{LinkSpec, RadioEnvironment};
use waterslide_core::converse::{BoundProfile, ConverseChannel};
use waterslide_core::density::{
    infinite_power_density, interference_sum, optimal_code_density_upper_bound, practical_code_density_curve,
    uncoded_density_curve, unit_interference_brute_force, Geometry, LinkLayout, SpacingSolver, SubBands,
    Transmission,
};
use waterslide_core::ldpc::{
    check_node_loss_db, de_threshold, ldpc_waterslide, neighborhood_growth_loss_db, LdpcLink, RegularEnsemble,
};
use waterslide_core::math::{log_space, minimize_1d, SolverConfig};
use waterslide_core::power::{
    asymptotic_optimal_transmit_power, iterations_lower_bound, neighborhood_size, shannon_limit_transmit_power,
    stationarity_residual, waterslide_sweep, ChannelKind,
};

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

fn config(name: &str) -> Config {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    let text = std::fs::read_to_string(&path).expect("shipped config is readable");
    Config::from_toml_str(&text, &path.display().to_string()).expect("shipped config is valid")
}

fn link_of(cfg: &Config) -> LinkSpec {
    LinkSpec::new(cfg.link.distance, cfg.link.data_rate, cfg.link.target_pe).expect("valid link")
}

fn bfs_count(zeta: u32, depth: u32) -> u64 {
    let mut queue = VecDeque::from([(0u32, true)]);
    let mut count = 0;
    while let Some((level, is_root)) = queue.pop_front() {
        count += 1;
        if level < depth {
            let children = if is_root { zeta } else { zeta - 1 };
            queue.extend((0..children).map(|_| (level + 1, false)));
        }
    }
    count
}

fn iteration_bound_oracle() -> Verdict {
    let mut worst_inversion = 0.0_f64;
    let mut mismatches = Vec::new();
    for zeta in 2..=5 {
        for l in 0..=6 {
            let counted = bfs_count(zeta, l);
            let formula = neighborhood_size(l, zeta).expect("small sizes fit");
            if counted != formula {
                mismatches.push(format!("zeta={zeta} l={l}: bfs {counted} vs {formula}"));
            }
            let back = iterations_lower_bound(counted as f64, zeta).expect("n >= 1");
            worst_inversion = worst_inversion.max((back - f64::from(l)).abs());
        }
    }
    Verdict::new(
        mismatches.is_empty() && worst_inversion <= 1e-9,
        format!(
            "28 (zeta, l) pairs, {} count mismatches, worst inversion error {worst_inversion:.2e}",
            mismatches.len()
        ),
    )
}

/// Checks one random channel: strict decrease in n and in quality, and the
/// neighborhood round trip. Returns a description of the first violation.
fn check_converse_draw(channel: ConverseChannel, better: ConverseChannel, n: f64, target: f64) -> Option<String> {
    let profile = BoundProfile::new(channel).ok()?;
    let improved = BoundProfile::new(better).ok()?;
    let at_n = profile.evaluate(n).ln_pe_lower_bound;
    let at_more = profile.evaluate(1.3 * n).ln_pe_lower_bound;
    if !(at_more < at_n) {
        return Some(format!("{channel:?}: bound not decreasing in n at n={n}"));
    }
    let at_better = improved.evaluate(n).ln_pe_lower_bound;
    if !(at_better < at_n) {
        return Some(format!("{channel:?}: bound not decreasing in quality at n={n}"));
    }
    let nb = match profile.min_neighborhood(target) {
        Ok(nb) => nb,
        Err(e) => return Some(format!("{channel:?}: min_neighborhood failed: {e}")),
    };
    let ln_target = target.ln();
    if profile.evaluate(nb.neighborhood).ln_pe_lower_bound > ln_target + 1e-9 * ln_target.abs() {
        return Some(format!("{channel:?}: n={} misses target {target:e}", nb.neighborhood));
    }
    if nb.neighborhood > 1.0 {
        let shy = nb.neighborhood * (1.0 - 1e-8);
        if profile.evaluate(shy).ln_pe_lower_bound <= ln_target - 1e-9 * ln_target.abs() {
            return Some(format!("{channel:?}: n={} is not the smallest for {target:e}", nb.neighborhood));
        }
    }
    None
}

fn converse_monotonicity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de);
    let mut failures = Vec::new();
    for _ in 0..100 {
        let p = 10f64.powf(rng.random_range(-3.0..-0.7));
        let capacity = 1.0 - waterslide_core::math::binary_entropy(p);
        let rate = rng.random_range(0.05..0.9) * capacity;
        let n = 10f64.powf(rng.random_range(0.3..3.0));
        let target = 10f64.powf(-rng.random_range(2.0..30.0));
        let ch = ConverseChannel::bsc(p, rate).expect("feasible draw");
        let better = ConverseChannel::bsc(0.8 * p, rate).expect("feasible draw");
        failures.extend(check_converse_draw(ch, better, n, target));
    }
    for _ in 0..100 {
        let snr = 10f64.powf(rng.random_range(-1.0..1.5));
        let rate = rng.random_range(0.05..0.9) * 0.5 * (1.0 + snr).log2();
        let n = 10f64.powf(rng.random_range(0.3..3.0));
        let target = 10f64.powf(-rng.random_range(2.0..30.0));
        let ch = ConverseChannel::awgn(snr, 1.0, rate).expect("feasible draw");
        let better = ConverseChannel::awgn(1.25 * snr, 1.0, rate).expect("feasible draw");
        failures.extend(check_converse_draw(ch, better, n, target));
    }
    let detail = match failures.first() {
        None => "200 draws (100 BSC, 100 AWGN): strict decrease in n and quality, round trip exact".to_string(),
        Some(first) => format!("{} of 200 draws violate; first: {first}", failures.len()),
    };
    Verdict::new(failures.is_empty(), detail)
}

fn divergence_and_boundedness() -> Verdict {
    let cfg = config("bsc_waterslide.toml");
    let link = link_of(&cfg);
    let grid = log_space(1e-2, 1e-40, 40);
    let started = Instant::now();
    let rows: Vec<_> = waterslide_sweep(&grid, &link, &cfg.environment, &cfg.decoder, ChannelKind::Bsc, &cfg.search)
        .into_iter()
        .collect::<Result<_, _>>()
        .expect("every target is feasible");
    let elapsed = started.elapsed().as_secs_f64();

    let increasing = rows.windows(2).all(|w| w[1].total_power > w[0].total_power);
    let tail: Vec<f64> = rows
        .iter()
        .zip(&grid)
        .filter(|(_, &pe)| pe <= 1e-10 * (1.0 + 1e-9))
        .map(|(r, _)| r.transmit_power)
        .collect();
    let (lo, hi) = tail.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    let variation = (hi - lo) / lo;
    let first_total = rows[0].total_power;
    let last_total = rows[rows.len() - 1].total_power;
    let at_1e10 = rows[grid.iter().position(|&pe| pe <= 1e-10 * (1.0 + 1e-9)).unwrap()].total_power;
    let still_growing = last_total > at_1e10 * (1.0 + 1e-6);

    let xi_t = link.path_weight(&cfg.environment);
    let r_ch = link.spectral_rate(&cfg.environment);
    let gamma = cfg.decoder.gamma(&link, &cfg.environment);
    let cap = |p_t: f64| ChannelKind::Bsc.capacity(p_t / xi_t, &cfg.environment);
    // Minimize the large-n objective P_T - (2 gamma / ln 2) ln(C(P_T) - R)
    // directly, over the log excess above the Shannon-limit power.
    let p_sh = shannon_limit_transmit_power(&link, &cfg.environment, ChannelKind::Bsc).expect("Shannon limit");
    let objective = |u: f64| {
        let p_t = p_sh * (1.0 + u.exp());
        p_t - 2.0 * gamma / LN_2 * (cap(p_t) - r_ch).ln()
    };
    let cfg_1d = SolverConfig::default().with_grid_points(400).with_tolerances(1e-13, 1e-13);
    let minimum = minimize_1d(objective, -20.0, 10.0, &cfg_1d).expect("objective has a minimum");
    let asymptotic = p_sh * (1.0 + minimum.x.exp());
    let residual = stationarity_residual(asymptotic, gamma, cap, r_ch).expect("above capacity");
    let root = asymptotic_optimal_transmit_power(&link, &cfg.environment, &cfg.decoder, ChannelKind::Bsc)
        .expect("stationary point exists");

    // Informational: the finite-Pe optimizer follows the growth rate log2(zeta - 1)
    // that the large-n objective leaves out.
    let deepest = rows[rows.len() - 1].transmit_power;
    let growth = f64::from(cfg.decoder.max_degree - 1).log2();
    let at_deepest = stationarity_residual(deepest, gamma, cap, r_ch).expect("above capacity");
    let at_deepest_scaled = stationarity_residual(deepest, gamma / growth, cap, r_ch).expect("above capacity");

    Verdict::new(
        increasing && still_growing && variation < 0.1 && residual.abs() < 1e-2 && elapsed < 60.0,
        format!(
            "P_total {first_total:.4e} -> {last_total:.4e} W, strictly increasing: {increasing}; \
             P_T spread over 1e-10..1e-40 {:.3}%; residual at the large-n optimizer {asymptotic:.5e} W is \
             {residual:.2e} (root {root:.5e} W); sweep {elapsed:.1} s. Optimized P_T at 1e-40 is {deepest:.5e} W, \
             residual there {at_deepest:.2e}, or {at_deepest_scaled:.2e} with gamma / log2(zeta - 1)",
            100.0 * variation
        ),
    )
}

fn double_log_scaling() -> Verdict {
    let cfg = config("awgn_waterslide.toml");
    let link = link_of(&cfg);
    let grid = log_space(1e-4, 1e-64, 31);
    let rows: Vec<_> = waterslide_sweep(&grid, &link, &cfg.environment, &cfg.decoder, ChannelKind::Awgn, &cfg.search)
        .into_iter()
        .collect::<Result<_, _>>()
        .expect("every target is feasible");
    let xs: Vec<f64> = grid.iter().map(|pe| (1.0 / pe).log2().log2()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.decode_power).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = 1.0 - ss_res / ss_tot;
    Verdict::new(
        r2 > 0.99,
        format!("AWGN decode power vs log2 log2(1/Pe), 31 targets: slope {slope:.4e} W, R^2 = {r2:.6}"),
    )
}

fn ldpc_context(cfg: &Config) -> LdpcLink {
    LdpcLink {
        link: link_of(cfg),
        env: cfg.environment,
        tech: cfg.decoder,
        ensemble: cfg.ensemble,
    }
}

fn ldpc_gap() -> Verdict {
    let cfg = config("ldpc_waterslide.toml");
    let ctx = ldpc_context(&cfg);
    let mut grid = log_space(1e-2, 1e-40, 20);
    let last_decade = log_space(1e-39, 1e-40, 5);
    grid.extend(&last_decade[..4]);
    let rows: Vec<_> = ldpc_waterslide(&grid, &ctx, &cfg.search)
        .expect("valid context")
        .into_iter()
        .collect::<Result<_, _>>()
        .expect("every target is feasible");
    let mut decade: Vec<f64> = rows
        .iter()
        .filter(|r| r.achieved.target_pe <= 1e-39 * (1.0 + 1e-9))
        .map(|r| r.gap_db)
        .collect();
    decade.sort_by(f64::total_cmp);
    let variation = decade[decade.len() - 1] - decade[0];
    let final_gap = rows[19].gap_db;
    let ens = RegularEnsemble::three_four();
    let check_loss = check_node_loss_db(&ens);
    let growth_loss = neighborhood_growth_loss_db(12.0, 6.0);
    let identities = (check_loss - 2.43).abs() < 0.01 && (growth_loss - 1.42).abs() < 0.01;
    let in_range = (final_gap - 4.8).abs() <= 1.0;
    let residual = final_gap - check_loss - growth_loss;
    Verdict::new(
        variation < 0.2 && in_range && identities,
        format!(
            "gap at 1e-40 {final_gap:.3} dB (window 3.8..5.8: {in_range}); variation over the last decade \
             {variation:.3} dB; check-node loss {check_loss:.4} dB, growth loss {growth_loss:.4} dB; \
             unattributed residual {residual:.3} dB"
        ),
    )
}

fn sawtooth() -> Verdict {
    let cfg = config("ldpc_waterslide.toml");
    let ctx = ldpc_context(&cfg);
    let threshold = de_threshold(&ctx.ensemble).expect("threshold exists");
    let grid = log_space(1e-2, 1e-40, 200);
    let powers: Vec<(f64, u32)> = grid
        .par_iter()
        .map(|&pe| {
            let mut local = ctx;
            local.link.target_pe = pe;
            let p = local.optimize(pe, threshold).expect("feasible target");
            (p.transmit_power, p.iterations)
        })
        .collect();
    let increases = powers.windows(2).filter(|w| w[1].0 > w[0].0).count();
    let drops = powers.windows(2).filter(|w| w[1].0 < w[0].0).count();
    let iterations = (powers[0].1, powers[powers.len() - 1].1);
    Verdict::new(
        increases > 0 && drops > 0,
        format!(
            "200 targets: {increases} steps up and {drops} steps down in optimal P_T; \
             iterations {} -> {}",
            iterations.0, iterations.1
        ),
    )
}

fn density_limits() -> Verdict {
    let solver = SpacingSolver::new(LinkLayout::short_range()).expect("valid layout");
    let scan = SubBands::Scan {
        max: solver.layout().default_band_cap(),
    };
    let gaps = [0.0, 1.0, 3.0];
    let targets: Vec<f64> = (3..=15).map(|k| 10f64.powi(-k)).collect();
    let modes: Vec<Transmission> = gaps
        .iter()
        .map(|&gap_db| Transmission::Coded { gap_db, sub_bands: scan })
        .chain([Transmission::Uncoded])
        .collect();
    let table: Vec<Vec<f64>> = modes
        .par_iter()
        .map(|&mode| {
            targets
                .par_iter()
                .map(|&pe| infinite_power_density(pe, &solver, mode).expect("limit exists").density)
                .collect()
        })
        .collect();
    let at = |pe_exp: i32| (pe_exp - 3) as usize;
    let coded_change: Vec<f64> = table[..3]
        .iter()
        .map(|row| ((row[at(15)] - row[at(9)]) / row[at(9)]).abs())
        .collect();
    let coded_flat = coded_change.iter().all(|&c| c < 0.01);
    let uncoded = &table[3];
    let uncoded_decreasing = uncoded.windows(2).all(|w| w[1] < w[0]);
    let uncoded_ratio = uncoded[uncoded.len() - 1] / uncoded[0];
    let ordered = (0..targets.len()).all(|k| {
        table[0][k] >= table[1][k] && table[1][k] >= table[2][k] && table[2][k] >= table[3][k]
    });
    Verdict::new(
        coded_flat && uncoded_decreasing && uncoded_ratio < 0.1 && ordered,
        format!(
            "coded densities at 1e-15 {:.5}/{:.5}/{:.5} per m^2, worst change from 1e-9 {:.1e}; \
             uncoded {:.4} -> {:.4} (final/initial {:.1}%, needs < 10%), decreasing: {uncoded_decreasing}; \
             ordering holds: {ordered}",
            table[0][at(15)],
            table[1][at(15)],
            table[2][at(15)],
            coded_change.iter().copied().fold(0.0, f64::max),
            uncoded[0],
            uncoded[uncoded.len() - 1],
            100.0 * uncoded_ratio
        ),
    )
}

/// Continuum estimate of the lattice sum outside the brute-force index window:
/// density times the integral of `(lambda/s)^alpha` beyond the window boundary.
fn window_tail(g: &Geometry, env: &RadioEnvironment, half_width: i64) -> f64 {
    let (d, n) = (g.spacing, half_width as f64);
    let row = 0.5 * 3.0_f64.sqrt() * d;
    let (cx, cy) = (g.link_distance * g.orientation.cos(), g.link_distance * g.orientation.sin());
    let (x0, x1) = (-(n + 0.25) * d - cx, (n + 0.25) * d + 0.25 * d - cx);
    let (y0, y1) = (-(n + 0.5) * row - cy, (n + 0.5) * row - cy);
    let reach = |phi: f64| {
        let (s, c) = phi.sin_cos();
        let mut r = f64::INFINITY;
        if c > 0.0 {
            r = r.min(x1 / c);
        }
        if c < 0.0 {
            r = r.min(x0 / c);
        }
        if s > 0.0 {
            r = r.min(y1 / s);
        }
        if s < 0.0 {
            r = r.min(y0 / s);
        }
        r
    };
    let alpha = env.path_loss_exponent;
    let tau = std::f64::consts::TAU;
    let mut cuts: Vec<f64> = [(x0, y0), (x0, y1), (x1, y0), (x1, y1)]
        .iter()
        .map(|&(x, y)| f64::atan2(y, x).rem_euclid(tau))
        .collect();
    cuts.extend([0.0, tau]);
    cuts.sort_by(f64::total_cmp);
    // Composite Simpson on each smooth stretch between corner directions.
    let steps = 4000;
    let mut integral = 0.0;
    for w in cuts.windows(2) {
        let h = (w[1] - w[0]) / steps as f64;
        if h <= 0.0 {
            continue;
        }
        let f = |k: usize| reach(w[0] + h * k as f64).powf(2.0 - alpha);
        let mut acc = f(0) + f(steps);
        for k in 1..steps {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k);
        }
        integral += acc * h / 3.0;
    }
    let rho = 2.0 / (3.0_f64.sqrt() * d * d);
    rho * env.wavelength().powf(alpha) / (alpha - 2.0) * integral
}

fn interference_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a77_1ce5);
    let draws: Vec<(f64, f64, f64, f64)> = (0..20)
        .map(|_| {
            (
                rng.random_range(0.3..5.0),
                rng.random_range(0.1..3.0),
                rng.random_range(0.0..std::f64::consts::TAU),
                4.0 - rng.random_range(0.0..1.8),
            )
        })
        .collect();
    let results: Vec<(f64, f64, f64)> = draws
        .par_iter()
        .map(|&(spacing, r, theta, alpha)| {
            let env = RadioEnvironment {
                path_loss_exponent: alpha,
                ..RadioEnvironment::sixty_ghz()
            };
            let layout = LinkLayout {
                orientation: theta,
                ..LinkLayout::new(r, 1.5e9, env).expect("valid layout")
            };
            let scenario = layout.scenario(spacing, 1);
            let adaptive = interference_sum(1.0, &scenario).expect("nondegenerate draw");
            let g = scenario.geometry();
            let brute = unit_interference_brute_force(&g, &env, 1000).expect("nondegenerate draw");
            let corrected = brute + window_tail(&g, &env, 1000);
            (alpha, (adaptive - brute).abs() / brute, (adaptive - corrected).abs() / corrected)
        })
        .collect();
    let failing: Vec<_> = results.iter().filter(|r| r.1 > 1e-6).collect();
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let worst_corrected = results.iter().map(|r| r.2).fold(0.0, f64::max);
    let lowest_failing_alpha = failing.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let highest_failing_alpha = failing.iter().map(|r| r.0).fold(0.0, f64::max);
    let detail = if failing.is_empty() {
        format!("20 draws: worst relative difference {worst:.2e}; with the window tail added {worst_corrected:.2e}")
    } else {
        format!(
            "{} of 20 draws exceed 1e-6 against the 2001x2001 sum (alpha {lowest_failing_alpha:.2}..{highest_failing_alpha:.2}, \
             worst {worst:.2e}): the truncated sum omits the tail beyond the window; \
             with that tail added back the worst difference is {worst_corrected:.2e}",
            failing.len()
        )
    };
    Verdict::new(failing.is_empty(), detail)
}

fn finite_power_density_ordering() -> Verdict {
    let cfg = config("density_finite.toml");
    let solver = SpacingSolver::new(cfg.layout()).expect("valid layout");
    let grid = cfg.power_sweep.values();
    let pe = cfg.density.target_pe;
    let uncoded: Vec<f64> = uncoded_density_curve(pe, &grid, &solver)
        .into_iter()
        .map(|r| r.expect("uncoded row").density)
        .collect();
    let practical: Vec<f64> = practical_code_density_curve(&cfg.practical, &grid, &solver)
        .expect("practical curve")
        .iter()
        .map(|p| p.density)
        .collect();
    let bound: Vec<_> = optimal_code_density_upper_bound(&grid, &solver, &cfg.decoder, pe, cfg.band_scan())
        .expect("upper bound")
        .into_iter()
        .map(|r| r.expect("upper bound row"))
        .collect();

    let first_uncoded_win = (0..grid.len()).find(|&k| uncoded[k] > practical[k]);
    let reversal = first_uncoded_win.and_then(|k0| (k0..grid.len()).find(|&k| practical[k] > uncoded[k]));
    let covers = |k: usize, other: f64| bound[k].point.density >= other * (1.0 - 1e-9);
    let uncovered_uncoded: Vec<f64> = (0..grid.len()).filter(|&k| !covers(k, uncoded[k])).map(|k| grid[k]).collect();
    let uncovered_practical = (0..grid.len()).filter(|&k| !covers(k, practical[k])).count();
    let feasible: Vec<_> = bound.iter().filter(|b| b.point.feasible).collect();
    let above_shannon = feasible.iter().all(|b| b.design_sinr > b.shannon_min_sinr);
    let closest_excess = feasible
        .iter()
        .map(|b| b.design_sinr / b.shannon_min_sinr - 1.0)
        .fold(f64::INFINITY, f64::min);

    let crossover = match (first_uncoded_win, reversal) {
        (Some(a), Some(b)) => format!("uncoded ahead from {:.3e} W, practical ahead again from {:.3e} W", grid[a], grid[b]),
        (Some(a), None) => format!("uncoded ahead from {:.3e} W with no reversal", grid[a]),
        _ => "uncoded never ahead".to_string(),
    };
    let domination = if uncovered_uncoded.is_empty() && uncovered_practical == 0 {
        "upper bound covers both curves at all 41 budgets".to_string()
    } else {
        format!(
            "upper bound below uncoded at {} budgets ({:.2e}..{:.2e} W) and below practical at {uncovered_practical}",
            uncovered_uncoded.len(),
            uncovered_uncoded.first().copied().unwrap_or(f64::NAN),
            uncovered_uncoded.last().copied().unwrap_or(f64::NAN),
        )
    };
    Verdict::new(
        reversal.is_some() && uncovered_uncoded.is_empty() && uncovered_practical == 0 && above_shannon,
        format!(
            "{crossover}; {domination}; design SINR above the Shannon minimum at all {} feasible budgets \
             (smallest relative excess {closest_excess:.1e}, search floor 1e-6)",
            feasible.len()
        ),
    )
}

fn determinism() -> Verdict {
    let binary = env!("CARGO_BIN_EXE_waterslide");
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cases = [
        ("waterslide-bsc", "bsc_waterslide.toml"),
        ("waterslide-awgn", "awgn_waterslide.toml"),
        ("ldpc-waterslide", "ldpc_waterslide.toml"),
        ("density-infinite", "density_infinite.toml"),
        ("density-finite", "density_finite.toml"),
        ("density-practical", "density_finite.toml"),
        ("density-upper-bound", "density_finite.toml"),
        ("point", "awgn_waterslide.toml"),
    ];
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut differing = Vec::new();
    for (command, file) in cases {
        let mut outputs = Vec::new();
        for (run, jobs) in [(0, "1"), (1, "4")] {
            let out = dir.path().join(format!("{command}-{run}.csv"));
            let result = Process::new(binary)
                .args([command, "-c"])
                .arg(configs.join(file))
                .arg("-o")
                .arg(&out)
                .args(["--override", "sweep.pe.points=6", "--override", "sweep.power.points=6"])
                .env("WATERSLIDE_JOBS", jobs)
                .output()
                .expect("binary runs");
            if !result.status.success() {
                differing.push(format!("{command} exited with {}", result.status));
                break;
            }
            let bytes = if command == "point" {
                result.stdout
            } else {
                std::fs::read(&out).expect("published CSV")
            };
            outputs.push(bytes);
        }
        if outputs.len() == 2 && outputs[0] != outputs[1] {
            differing.push(command.to_string());
        }
    }
    let detail = if differing.is_empty() {
        format!("{} commands run twice (1 and 4 worker threads): byte-identical output", cases.len())
    } else {
        format!("outputs differ or runs failed: {}", differing.join(", "))
    };
    Verdict::new(differing.is_empty(), detail)
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("iteration-bound oracle", iteration_bound_oracle),
        ("converse monotonicity", converse_monotonicity),
        ("divergence and boundedness", divergence_and_boundedness),
        ("double-log scaling", double_log_scaling),
        ("LDPC gap", ldpc_gap),
        ("sawtooth", sawtooth),
        ("density limits", density_limits),
        ("interference oracle", interference_oracle),
        ("finite-power density ordering", finite_power_density_ordering),
        ("determinism", determinism),
    ];
    let mut passed = 0;
    for (index, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let verdict = check();
        let status = if verdict.pass { "PASS" } else { "FAIL" };
        passed += usize::from(verdict.pass);
        println!(
            "{status} [{:>2}] {name}: {} ({:.1} s)",
            index + 1,
            verdict.detail,
            started.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {passed}/{} criteria pass", criteria.len());
    let strict = std::env::var("WATERSLIDE_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && passed < criteria.len() {
        std::process::exit(1);
    }
}
