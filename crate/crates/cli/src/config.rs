//! Scenario configuration: TOML with every key optional, defaults taken from
//! the reference 60 GHz scenario, unknown keys rejected with their full path.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};
use toml::{Table, Value};
use waterslide_core::channel::RadioEnvironment;
use waterslide_core::density::{InterferenceWindow, LinkLayout, PracticalCode, SubBands};
use waterslide_core::ldpc::RegularEnsemble;
use waterslide_core::math::{lin_space, log_space, SolverConfig};
use waterslide_core::power::{DecoderTech, PowerSearch};

use crate::error::{CliError, CliResult};

/// A 1-D sweep: `points` values from `start` to `stop`, log- or linearly spaced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub log: bool,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.log {
            log_space(self.start, self.stop, self.points)
        } else {
            lin_space(self.start, self.stop, self.points)
        }
    }

    fn validate(&self, path: &str) -> CliResult<()> {
        if self.points == 0 {
            return Err(CliError::config(format!("{path}.points"), "must be at least 1"));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(CliError::config(path, "start and stop must be finite"));
        }
        if self.log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(CliError::config(path, "log-spaced sweeps need start > 0 and stop > 0"));
        }
        Ok(())
    }
}

/// Point-to-point link used by the waterslide commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSection {
    pub distance: f64,
    pub data_rate: f64,
    /// Target for `point`.
    pub target_pe: f64,
}

/// Grid layout used by the density commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSection {
    pub link_distance: f64,
    pub orientation: f64,
    pub min_spacing: Option<f64>,
    pub max_sub_bands: Option<u32>,
    pub window: InterferenceWindow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensitySection {
    /// Gaps for the coded curves of `density-infinite`.
    pub gaps_db: Vec<f64>,
    /// Target for the finite-power density commands.
    pub target_pe: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub environment: RadioEnvironment,
    pub link: LinkSection,
    pub decoder: DecoderTech,
    pub ensemble: RegularEnsemble,
    pub search: PowerSearch,
    pub grid: GridSection,
    pub density: DensitySection,
    pub practical: PracticalCode,
    pub pe_sweep: SweepSpec,
    pub power_sweep: SweepSpec,
}

impl Default for Config {
    fn default() -> Self {
        Self::from_table(Table::new()).expect("defaults are valid")
    }
}

/// Reads keys out of one table, remembering which were consumed.
struct Section {
    path: String,
    table: Table,
}

impl Section {
    fn key_path(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn sub(&mut self, key: &str) -> CliResult<Section> {
        let path = self.key_path(key);
        match self.table.remove(key) {
            None => Ok(Section { path, table: Table::new() }),
            Some(Value::Table(table)) => Ok(Section { path, table }),
            Some(other) => Err(CliError::config(path, format!("expected a table, found {}", other.type_str()))),
        }
    }

    fn f64(&mut self, key: &str, default: f64) -> CliResult<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    fn opt_f64(&mut self, key: &str) -> CliResult<Option<f64>> {
        match self.table.remove(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(x)),
            Some(Value::Integer(i)) => Ok(Some(i as f64)),
            Some(other) => Err(CliError::config(
                self.key_path(key),
                format!("expected a number, found {}", other.type_str()),
            )),
        }
    }

    fn u32(&mut self, key: &str, default: u32) -> CliResult<u32> {
        Ok(self.opt_u32(key)?.unwrap_or(default))
    }

    fn opt_u32(&mut self, key: &str) -> CliResult<Option<u32>> {
        match self.table.remove(key) {
            None => Ok(None),
            Some(Value::Integer(i)) => u32::try_from(i)
                .map(Some)
                .map_err(|_| CliError::config(self.key_path(key), format!("{i} is out of range"))),
            Some(other) => Err(CliError::config(
                self.key_path(key),
                format!("expected an integer, found {}", other.type_str()),
            )),
        }
    }

    fn bool(&mut self, key: &str, default: bool) -> CliResult<bool> {
        match self.table.remove(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(b),
            Some(other) => Err(CliError::config(
                self.key_path(key),
                format!("expected a boolean, found {}", other.type_str()),
            )),
        }
    }

    fn f64_list(&mut self, key: &str, default: &[f64]) -> CliResult<Vec<f64>> {
        match self.table.remove(key) {
            None => Ok(default.to_vec()),
            Some(Value::Array(items)) => items
                .into_iter()
                .enumerate()
                .map(|(i, v)| match v {
                    Value::Float(x) => Ok(x),
                    Value::Integer(n) => Ok(n as f64),
                    other => Err(CliError::config(
                        format!("{}[{i}]", self.key_path(key)),
                        format!("expected a number, found {}", other.type_str()),
                    )),
                })
                .collect(),
            Some(other) => Err(CliError::config(
                self.key_path(key),
                format!("expected an array, found {}", other.type_str()),
            )),
        }
    }

    fn sweep(&mut self, key: &str, default: SweepSpec) -> CliResult<SweepSpec> {
        let mut s = self.sub(key)?;
        let spec = SweepSpec {
            start: s.f64("start", default.start)?,
            stop: s.f64("stop", default.stop)?,
            points: s.u32("points", default.points as u32)? as usize,
            log: s.bool("log", default.log)?,
        };
        spec.validate(&s.path)?;
        s.finish()?;
        Ok(spec)
    }

    /// Fails on the first key nobody asked for.
    fn finish(self) -> CliResult<()> {
        match self.table.keys().next() {
            None => Ok(()),
            Some(key) => Err(CliError::config(self.key_path(key), "unknown key")),
        }
    }
}

fn checked<T>(path: &str, r: waterslide_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::config(path, e.to_string()))
}

impl Config {
    pub fn from_toml_str(text: &str, origin: &str) -> CliResult<Self> {
        let table: Table = text.parse().map_err(|source| CliError::Parse {
            origin: origin.to_string(),
            source,
        })?;
        Self::from_table(table)
    }

    pub fn from_table(table: Table) -> CliResult<Self> {
        let mut root = Section {
            path: String::new(),
            table,
        };
        let reference = RadioEnvironment::sixty_ghz();

        let mut s = root.sub("environment")?;
        let environment = RadioEnvironment {
            carrier_frequency: s.f64("carrier_frequency", reference.carrier_frequency)?,
            bandwidth: s.f64("bandwidth", reference.bandwidth)?,
            path_loss_exponent: s.f64("path_loss_exponent", reference.path_loss_exponent)?,
            temperature: s.f64("temperature", reference.temperature)?,
        };
        checked(&s.path, environment.validate())?;
        s.finish()?;

        let mut s = root.sub("link")?;
        let link = LinkSection {
            distance: s.f64("distance", 10.0)?,
            data_rate: s.f64("data_rate", 1.5e9)?,
            target_pe: s.f64("target_pe", 1e-6)?,
        };
        checked(
            &s.path,
            waterslide_core::channel::LinkSpec::new(link.distance, link.data_rate, link.target_pe),
        )?;
        s.finish()?;

        let mut s = root.sub("decoder")?;
        let decoder = DecoderTech {
            node_energy: s.f64("node_energy", 3e-12)?,
            max_degree: s.u32("max_degree", 4)?,
            decode_weight: s.f64("decode_weight", 1.0)?,
            decode_throughput: s.opt_f64("decode_throughput")?,
        };
        checked(&s.path, decoder.validate())?;
        s.finish()?;

        let mut s = root.sub("ensemble")?;
        let ensemble = checked(
            &s.path.clone(),
            RegularEnsemble::new(s.u32("variable_degree", 3)?, s.u32("check_degree", 4)?),
        )?;
        s.finish()?;

        let mut s = root.sub("search")?;
        let d = PowerSearch::default();
        let search = PowerSearch {
            grid_points: s.u32("grid_points", d.grid_points as u32)? as usize,
            min_excess: s.f64("min_excess", d.min_excess)?,
            max_ratio: s.f64("max_ratio", d.max_ratio)?,
            refine: SolverConfig {
                abs_tol: s.f64("abs_tol", d.refine.abs_tol)?,
                rel_tol: s.f64("rel_tol", d.refine.rel_tol)?,
                ..d.refine
            },
        };
        checked(&s.path, search.validate())?;
        s.finish()?;

        let mut s = root.sub("grid")?;
        let w = InterferenceWindow::default();
        let grid = GridSection {
            link_distance: s.f64("link_distance", 1.0)?,
            orientation: s.f64("orientation", 0.0)?,
            min_spacing: s.opt_f64("min_spacing")?,
            max_sub_bands: s.opt_u32("max_sub_bands")?,
            window: InterferenceWindow {
                width: s.f64("window_width", w.width)?,
                cutoff: s.f64("window_cutoff", w.cutoff)?,
            },
        };
        if grid.max_sub_bands == Some(0) {
            return Err(CliError::config(format!("{}.max_sub_bands", s.path), "must be at least 1"));
        }
        let layout_path = s.path.clone();
        s.finish()?;

        let mut s = root.sub("density")?;
        let density = DensitySection {
            gaps_db: s.f64_list("gaps_db", &[0.0, 1.0, 3.0])?,
            target_pe: s.f64("target_pe", 1e-6)?,
        };
        if let Some(g) = density.gaps_db.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
            return Err(CliError::config(format!("{}.gaps_db", s.path), format!("gap {g} must be >= 0")));
        }
        if !(density.target_pe > 0.0 && density.target_pe < 1.0) {
            return Err(CliError::config(format!("{}.target_pe", s.path), "must lie in (0, 1)"));
        }
        s.finish()?;

        let mut s = root.sub("practical")?;
        let reference_code = PracticalCode::reference();
        let practical = PracticalCode {
            required_sinr: 10f64.powf(s.f64("required_sinr_db", 5.5)? / 10.0),
            code_rate: s.f64("code_rate", reference_code.code_rate)?,
            node_energy: s.f64("node_energy", reference_code.node_energy)?,
            iterations: s.u32("iterations", reference_code.iterations)?,
        };
        checked(&s.path, practical.validate())?;
        s.finish()?;

        let mut s = root.sub("sweep")?;
        let pe_sweep = s.sweep(
            "pe",
            SweepSpec {
                start: 1e-2,
                stop: 1e-40,
                points: 40,
                log: true,
            },
        )?;
        if pe_sweep.values().iter().any(|p| !(*p > 0.0 && *p < 0.5)) {
            return Err(CliError::config("sweep.pe", "error probabilities must lie in (0, 0.5)"));
        }
        let power_sweep = s.sweep(
            "power",
            SweepSpec {
                start: 1e-4,
                stop: 10.0,
                points: 41,
                log: true,
            },
        )?;
        if power_sweep.values().iter().any(|p| !(*p > 0.0)) {
            return Err(CliError::config("sweep.power", "budgets must be > 0"));
        }
        s.finish()?;
        root.finish()?;

        let config = Config {
            environment,
            link,
            decoder,
            ensemble,
            search,
            grid,
            density,
            practical,
            pe_sweep,
            power_sweep,
        };
        checked(&layout_path, config.layout().validate())?;
        Ok(config)
    }

    pub fn layout(&self) -> LinkLayout {
        LinkLayout {
            link_distance: self.grid.link_distance,
            orientation: self.grid.orientation,
            data_rate: self.link.data_rate,
            env: self.environment,
            min_spacing: self.grid.min_spacing,
            window: self.grid.window,
        }
    }

    pub fn band_scan(&self) -> SubBands {
        SubBands::Scan {
            max: self.grid.max_sub_bands.unwrap_or_else(|| self.layout().default_band_cap()),
        }
    }

    /// Every resolved setting, one `key = value` per line in a fixed order.
    /// Floats print in shortest round-trip form, so equal configs render equally.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        let e = &self.environment;
        put("environment.carrier_frequency", format!("{:?}", e.carrier_frequency));
        put("environment.bandwidth", format!("{:?}", e.bandwidth));
        put("environment.path_loss_exponent", format!("{:?}", e.path_loss_exponent));
        put("environment.temperature", format!("{:?}", e.temperature));
        put("link.distance", format!("{:?}", self.link.distance));
        put("link.data_rate", format!("{:?}", self.link.data_rate));
        put("link.target_pe", format!("{:?}", self.link.target_pe));
        let d = &self.decoder;
        put("decoder.node_energy", format!("{:?}", d.node_energy));
        put("decoder.max_degree", d.max_degree.to_string());
        put("decoder.decode_weight", format!("{:?}", d.decode_weight));
        put("decoder.decode_throughput", format!("{:?}", d.decode_throughput));
        put("ensemble.variable_degree", self.ensemble.variable_degree.to_string());
        put("ensemble.check_degree", self.ensemble.check_degree.to_string());
        put("search.grid_points", self.search.grid_points.to_string());
        put("search.min_excess", format!("{:?}", self.search.min_excess));
        put("search.max_ratio", format!("{:?}", self.search.max_ratio));
        put("search.abs_tol", format!("{:?}", self.search.refine.abs_tol));
        put("search.rel_tol", format!("{:?}", self.search.refine.rel_tol));
        let g = &self.grid;
        put("grid.link_distance", format!("{:?}", g.link_distance));
        put("grid.orientation", format!("{:?}", g.orientation));
        put("grid.min_spacing", format!("{:?}", g.min_spacing));
        put("grid.max_sub_bands", format!("{:?}", g.max_sub_bands));
        put("grid.window_width", format!("{:?}", g.window.width));
        put("grid.window_cutoff", format!("{:?}", g.window.cutoff));
        put("density.gaps_db", format!("{:?}", self.density.gaps_db));
        put("density.target_pe", format!("{:?}", self.density.target_pe));
        let p = &self.practical;
        put("practical.required_sinr", format!("{:?}", p.required_sinr));
        put("practical.code_rate", format!("{:?}", p.code_rate));
        put("practical.node_energy", format!("{:?}", p.node_energy));
        put("practical.iterations", p.iterations.to_string());
        for (name, s) in [("pe", &self.pe_sweep), ("power", &self.power_sweep)] {
            put(&format!("sweep.{name}.start"), format!("{:?}", s.start));
            put(&format!("sweep.{name}.stop"), format!("{:?}", s.stop));
            put(&format!("sweep.{name}.points"), s.points.to_string());
            put(&format!("sweep.{name}.log"), s.log.to_string());
        }
        out
    }

    /// Hex SHA-256 of [`Config::canonical`].
    pub fn digest(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Applies `key.path=value` overrides to a parsed table. The value is read as
/// a TOML value, falling back to a bare string.
pub fn apply_overrides(table: &mut Table, overrides: &[String]) -> CliResult<()> {
    for item in overrides {
        let (key, raw) = item.split_once('=').ok_or_else(|| CliError::Override(item.clone()))?;
        let parts: Vec<&str> = key.trim().split('.').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(CliError::Override(item.clone()));
        }
        let value = format!("v = {}", raw.trim())
            .parse::<Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(raw.trim().to_string()));
        let (last, parents) = parts.split_last().expect("split yields at least one part");
        let mut cursor = &mut *table;
        for (depth, p) in parents.iter().enumerate() {
            let entry = cursor
                .entry(p.to_string())
                .or_insert_with(|| Value::Table(Table::new()));
            cursor = match entry {
                Value::Table(t) => t,
                _ => {
                    return Err(CliError::config(parts[..=depth].join("."), "is not a table"));
                }
            };
        }
        cursor.insert(last.to_string(), value);
    }
    Ok(())
}
