//! One function per command, each turning a [`Config`] into a table.

use std::fmt::Write as _;

use waterslide_core::channel::LinkSpec;
use waterslide_core::density::{
    infinite_power_density, optimal_code_density_upper_bound, practical_code_density_curve, uncoded_density_curve,
    DensityPoint, SpacingSolver, Transmission,
};
use waterslide_core::ldpc::{ldpc_waterslide, LdpcLink};
use waterslide_core::power::{optimize_transmit_power, shannon_limit_transmit_power, waterslide_sweep, ChannelKind};
use waterslide_core::Error;

use crate::config::Config;
use crate::error::CliResult;
use crate::output::{Cell, CsvTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Command {
    /// Total-power lower bound against target Pe, hard-decision channel.
    WaterslideBsc,
    /// Total-power lower bound against target Pe, Gaussian channel.
    WaterslideAwgn,
    /// Regular-LDPC achieved total power next to the hard-decision bound.
    LdpcWaterslide,
    /// Density with unlimited transmit power, uncoded and coded.
    DensityInfinite,
    /// Uncoded density against total power.
    DensityFinite,
    /// Density of the reference practical code against total power.
    DensityPractical,
    /// Converse-based density upper bound against total power.
    DensityUpperBound,
    /// Single optimized bound point, printed to standard output.
    Point,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::WaterslideBsc => "waterslide-bsc",
            Command::WaterslideAwgn => "waterslide-awgn",
            Command::LdpcWaterslide => "ldpc-waterslide",
            Command::DensityInfinite => "density-infinite",
            Command::DensityFinite => "density-finite",
            Command::DensityPractical => "density-practical",
            Command::DensityUpperBound => "density-upper-bound",
            Command::Point => "point",
        }
    }

    pub fn all() -> [Command; 8] {
        [
            Command::WaterslideBsc,
            Command::WaterslideAwgn,
            Command::LdpcWaterslide,
            Command::DensityInfinite,
            Command::DensityFinite,
            Command::DensityPractical,
            Command::DensityUpperBound,
            Command::Point,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ChannelArg {
    Bsc,
    Awgn,
}

impl From<ChannelArg> for ChannelKind {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::Bsc => ChannelKind::Bsc,
            ChannelArg::Awgn => ChannelKind::Awgn,
        }
    }
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Table(CsvTable),
    Text(String),
}

pub fn execute(command: Command, config: &Config, channel: ChannelArg) -> CliResult<Outcome> {
    Ok(match command {
        Command::WaterslideBsc => Outcome::Table(waterslide(config, ChannelKind::Bsc)?),
        Command::WaterslideAwgn => Outcome::Table(waterslide(config, ChannelKind::Awgn)?),
        Command::LdpcWaterslide => Outcome::Table(ldpc(config)?),
        Command::DensityInfinite => Outcome::Table(density_infinite(config)?),
        Command::DensityFinite => Outcome::Table(density_finite(config)?),
        Command::DensityPractical => Outcome::Table(density_practical(config)?),
        Command::DensityUpperBound => Outcome::Table(density_upper_bound(config)?),
        Command::Point => Outcome::Text(point(config, channel.into())?),
    })
}

/// `(status, note)` for a row that could not be computed.
fn failure(e: &Error) -> (Cell, Cell) {
    let status = match e {
        Error::Infeasible(_) | Error::AboveThreshold { .. } => "infeasible",
        _ => "error",
    };
    (status.into(), e.to_string().into())
}

fn ok() -> (Cell, Cell) {
    ("ok".into(), "".into())
}

fn feasibility(p: &DensityPoint) -> (Cell, Cell) {
    if p.feasible {
        ok()
    } else {
        ("infeasible".into(), "".into())
    }
}

fn link_spec(config: &Config) -> CliResult<LinkSpec> {
    Ok(LinkSpec::new(config.link.distance, config.link.data_rate, config.link.target_pe)?)
}

fn waterslide(config: &Config, kind: ChannelKind) -> CliResult<CsvTable> {
    let link = link_spec(config)?;
    let env = config.environment;
    let p_sh = shannon_limit_transmit_power(&link, &env, kind)?;
    let grid = config.pe_sweep.values();
    let rows = waterslide_sweep(&grid, &link, &env, &config.decoder, kind, &config.search);
    let mut t = CsvTable::new(&[
        "target_pe",
        "transmit_power",
        "received_power",
        "shannon_transmit_power",
        "neighborhood",
        "iterations",
        "decode_power",
        "total_power",
        "status",
        "note",
    ]);
    for (pe, row) in grid.iter().zip(rows) {
        let (values, (status, note)) = match row {
            Ok(p) => (
                [p.transmit_power, p.received_power, p.neighborhood, p.iterations, p.decode_power, p.total_power],
                ok(),
            ),
            Err(e) => ([f64::NAN; 6], failure(&e)),
        };
        t.push(vec![
            (*pe).into(),
            values[0].into(),
            values[1].into(),
            p_sh.into(),
            values[2].into(),
            values[3].into(),
            values[4].into(),
            values[5].into(),
            status,
            note,
        ]);
    }
    Ok(t)
}

fn ldpc(config: &Config) -> CliResult<CsvTable> {
    let ctx = LdpcLink {
        link: link_spec(config)?,
        env: config.environment,
        tech: config.decoder,
        ensemble: config.ensemble,
    };
    let grid = config.pe_sweep.values();
    let rows = ldpc_waterslide(&grid, &ctx, &config.search)?;
    let mut t = CsvTable::new(&[
        "target_pe",
        "transmit_power",
        "crossover",
        "iterations",
        "decode_power",
        "total_power",
        "converse_total_power",
        "gap_db",
        "status",
        "note",
    ]);
    for (pe, row) in grid.iter().zip(rows) {
        match row {
            Ok(r) => {
                let (status, note) = ok();
                t.push(vec![
                    (*pe).into(),
                    r.achieved.transmit_power.into(),
                    r.achieved.crossover.into(),
                    r.achieved.iterations.into(),
                    r.achieved.decode_power.into(),
                    r.achieved.total_power.into(),
                    r.converse_total_power.into(),
                    r.gap_db.into(),
                    status,
                    note,
                ]);
            }
            Err(e) => {
                let (status, note) = failure(&e);
                let mut row: Vec<Cell> = vec![(*pe).into()];
                row.extend([f64::NAN; 2].map(Cell::from));
                row.push(Cell::Int(0));
                row.extend([f64::NAN; 4].map(Cell::from));
                row.extend([status, note]);
                t.push(row);
            }
        }
    }
    Ok(t)
}

const DENSITY_COLUMNS: [&str; 9] = [
    "sub_bands",
    "spacing",
    "same_band_density",
    "density",
    "transmit_power",
    "sinr",
    "required_sinr",
    "at_spacing_floor",
    "feasible",
];

fn density_cells(p: &DensityPoint) -> Vec<Cell> {
    vec![
        p.sub_bands.into(),
        p.spacing.into(),
        p.same_band_density.into(),
        p.density.into(),
        p.transmit_power.into(),
        p.sinr.into(),
        p.required_sinr.into(),
        p.at_spacing_floor.into(),
        p.feasible.into(),
    ]
}

fn density_failure_cells() -> Vec<Cell> {
    let mut cells: Vec<Cell> = vec![Cell::Int(0)];
    cells.extend([f64::NAN; 6].map(Cell::from));
    cells.extend([false, false].map(Cell::from));
    cells
}

fn columns(lead: &[&'static str], tail: &[&'static str]) -> Vec<&'static str> {
    let mut c = lead.to_vec();
    c.extend(DENSITY_COLUMNS);
    c.extend(tail);
    c
}

fn density_infinite(config: &Config) -> CliResult<CsvTable> {
    let solver = SpacingSolver::new(config.layout())?;
    let grid = config.pe_sweep.values();
    let mut schemes = vec![("uncoded", f64::NAN, Transmission::Uncoded)];
    for &gap_db in &config.density.gaps_db {
        schemes.push((
            "coded",
            gap_db,
            Transmission::Coded {
                gap_db,
                sub_bands: config.band_scan(),
            },
        ));
    }
    let jobs: Vec<_> = schemes
        .iter()
        .flat_map(|s| grid.iter().map(move |pe| (*s, *pe)))
        .collect();
    use rayon::prelude::*;
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&((_, _, mode), pe)| infinite_power_density(pe, &solver, mode))
        .collect();
    let mut t = CsvTable {
        columns: columns(&["scheme", "gap_db", "target_pe"], &["status", "note"]),
        rows: Vec::new(),
    };
    for (((name, gap, _), pe), res) in jobs.iter().zip(results) {
        let mut row: Vec<Cell> = vec![(*name).into(), (*gap).into(), (*pe).into()];
        match res {
            Ok(p) => {
                row.extend(density_cells(&p));
                let (s, n) = feasibility(&p);
                row.extend([s, n]);
            }
            Err(e) => {
                row.extend(density_failure_cells());
                let (s, n) = failure(&e);
                row.extend([s, n]);
            }
        }
        t.push(row);
    }
    Ok(t)
}

fn density_finite(config: &Config) -> CliResult<CsvTable> {
    let solver = SpacingSolver::new(config.layout())?;
    let grid = config.power_sweep.values();
    let rows = uncoded_density_curve(config.density.target_pe, &grid, &solver);
    let mut t = CsvTable {
        columns: columns(&["total_power"], &["status", "note"]),
        rows: Vec::new(),
    };
    for (budget, res) in grid.iter().zip(rows) {
        let mut row: Vec<Cell> = vec![(*budget).into()];
        match res {
            Ok(p) => {
                row.extend(density_cells(&p));
                let (s, n) = feasibility(&p);
                row.extend([s, n]);
            }
            Err(e) => {
                row.extend(density_failure_cells());
                let (s, n) = failure(&e);
                row.extend([s, n]);
            }
        }
        t.push(row);
    }
    Ok(t)
}

fn density_practical(config: &Config) -> CliResult<CsvTable> {
    let solver = SpacingSolver::new(config.layout())?;
    let grid = config.power_sweep.values();
    let p_d = config.practical.decode_power(config.link.data_rate)?;
    let rows = practical_code_density_curve(&config.practical, &grid, &solver)?;
    let mut t = CsvTable {
        columns: columns(&["total_power", "decode_power"], &["status", "note"]),
        rows: Vec::new(),
    };
    for (budget, p) in grid.iter().zip(rows) {
        let mut row: Vec<Cell> = vec![(*budget).into(), p_d.into()];
        row.extend(density_cells(&p));
        let (s, n) = feasibility(&p);
        row.extend([s, n]);
        t.push(row);
    }
    Ok(t)
}

fn density_upper_bound(config: &Config) -> CliResult<CsvTable> {
    let solver = SpacingSolver::new(config.layout())?;
    let grid = config.power_sweep.values();
    let rows = optimal_code_density_upper_bound(
        &grid,
        &solver,
        &config.decoder,
        config.density.target_pe,
        config.band_scan(),
    )?;
    let mut t = CsvTable {
        columns: columns(
            &["total_power", "decode_power"],
            &[
                "design_sinr",
                "shannon_min_sinr",
                "spectral_rate",
                "capacity",
                "gap_db",
                "neighborhood",
                "iterations",
                "status",
                "note",
            ],
        ),
        rows: Vec::new(),
    };
    for (budget, res) in grid.iter().zip(rows) {
        let mut row: Vec<Cell> = vec![(*budget).into()];
        match res {
            Ok(u) => {
                row.push(u.decode_power.into());
                row.extend(density_cells(&u.point));
                row.extend(
                    [
                        u.design_sinr,
                        u.shannon_min_sinr,
                        u.spectral_rate,
                        u.capacity,
                        u.gap_db,
                        u.neighborhood,
                        u.iterations,
                    ]
                    .map(Cell::from),
                );
                let (s, n) = feasibility(&u.point);
                row.extend([s, n]);
            }
            Err(e) => {
                row.push(f64::NAN.into());
                row.extend(density_failure_cells());
                row.extend([f64::NAN; 7].map(Cell::from));
                let (s, n) = failure(&e);
                row.extend([s, n]);
            }
        }
        t.push(row);
    }
    Ok(t)
}

fn point(config: &Config, kind: ChannelKind) -> CliResult<String> {
    let link = link_spec(config)?;
    let p = optimize_transmit_power(&link, &config.environment, &config.decoder, kind, &config.search)?;
    let p_sh = shannon_limit_transmit_power(&link, &config.environment, kind)?;
    let mut out = String::new();
    let channel = match kind {
        ChannelKind::Bsc => "bsc",
        ChannelKind::Awgn => "awgn",
    };
    let _ = writeln!(out, "channel = {channel}");
    for (k, v) in [
        ("target_pe", link.target_pe),
        ("transmit_power", p.transmit_power),
        ("received_power", p.received_power),
        ("path_weight", p.path_weight),
        ("shannon_transmit_power", p_sh),
        ("neighborhood", p.neighborhood),
        ("iterations", p.iterations),
        ("decode_power", p.decode_power),
        ("total_power", p.total_power),
        ("gamma", p.gamma),
        ("optimizer", p.optimizer),
    ] {
        let _ = writeln!(out, "{k} = {v:.16e}");
    }
    Ok(out)
}
