use super::{ModelError, Network};
use chrono::{NaiveDateTime, TimeDelta};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

const HYDRO_CSV: &str = include_str!("../../data/hydro.csv");
const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

/// Hourly demand, renewable potentials and hydro data aligned to a network.
///
/// Region-indexed vectors follow `Network::regions` order; `capacity_factor`
/// is keyed by carrier name and holds one series per region.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesSet {
    pub timestamps: Vec<NaiveDateTime>,
    /// MW, `[region][t]`
    pub demand: Vec<Vec<f64>>,
    /// Fractions in [0, 1], `carrier -> [region][t]`
    pub capacity_factor: BTreeMap<String, Vec<Vec<f64>>>,
    /// MWh/h, `[region][t]`
    pub hydro_inflow: Vec<Vec<f64>>,
    /// MWh per region
    pub hydro_energy_capacity: Vec<f64>,
    /// MW per region
    pub hydro_power_capacity: Vec<f64>,
}

impl TimeSeriesSet {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Upper generation potential of `carrier` at region `n`, step `t`.
    /// Carriers without a weather series are fully dispatchable.
    pub fn potential(&self, carrier: &str, n: usize, t: usize) -> f64 {
        self.capacity_factor
            .get(carrier)
            .map_or(1.0, |series| series[n][t])
    }

    /// Checks that every series matches the network and the shared length.
    pub fn validate(&self, network: &Network) -> Result<(), ModelError> {
        let t_len = self.len();
        if t_len == 0 {
            return Err(ModelError::EmptySeries);
        }
        let nr = network.regions.len();
        let here = PathBuf::from("<memory>");
        let check_table = |name: &str, table: &Vec<Vec<f64>>, lo: f64, hi: f64| {
            if table.len() != nr {
                return Err(ModelError::LengthMismatch {
                    file: PathBuf::from(name),
                    expected: nr,
                    found: table.len(),
                });
            }
            for (n, series) in table.iter().enumerate() {
                if series.len() != t_len {
                    return Err(ModelError::LengthMismatch {
                        file: PathBuf::from(name),
                        expected: t_len,
                        found: series.len(),
                    });
                }
                if let Some(t) = series.iter().position(|v| !(*v >= lo && *v <= hi)) {
                    return Err(ModelError::InvalidCell {
                        file: PathBuf::from(name),
                        column: network.regions[n].short_code.clone(),
                        row: t + 1,
                        reason: format!("value {} outside [{lo}, {hi}]", series[t]),
                    });
                }
            }
            Ok(())
        };
        check_table("demand", &self.demand, 0.0, f64::MAX)?;
        check_table("inflow", &self.hydro_inflow, 0.0, f64::MAX)?;
        for carrier in &network.carriers {
            if carrier.uses_capacity_factor_series {
                let table = self.capacity_factor.get(&carrier.name).ok_or_else(|| {
                    ModelError::MissingRegions {
                        file: PathBuf::from(format!("capacity_factor_{}", carrier.name)),
                        missing: network.regions.iter().map(|r| r.short_code.clone()).collect(),
                    }
                })?;
                check_table(&format!("capacity_factor_{}", carrier.name), table, 0.0, 1.0)?;
            }
        }
        for caps in [&self.hydro_energy_capacity, &self.hydro_power_capacity] {
            if caps.len() != nr {
                return Err(ModelError::LengthMismatch {
                    file: here.clone(),
                    expected: nr,
                    found: caps.len(),
                });
            }
            if let Some(n) = caps.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(ModelError::InvalidCell {
                    file: PathBuf::from("hydro"),
                    column: network.regions[n].short_code.clone(),
                    row: n + 1,
                    reason: "hydro capacity must be finite and >= 0".into(),
                });
            }
        }
        Ok(())
    }

    /// Picks `blocks` evenly spaced windows of `block_len` consecutive steps.
    pub fn sample_blocks(&self, blocks: usize, block_len: usize) -> Result<Self, ModelError> {
        let len = self.len();
        if blocks == 0 || block_len == 0 {
            return Err(ModelError::EmptySeries);
        }
        if blocks * block_len > len {
            return Err(ModelError::LengthMismatch {
                file: PathBuf::from("<sample>"),
                expected: blocks * block_len,
                found: len,
            });
        }
        let stride = len / blocks;
        let pad = (stride - block_len) / 2;
        let steps: Vec<usize> = (0..blocks)
            .flat_map(|k| {
                let start = k * stride + pad;
                start..start + block_len
            })
            .collect();
        Ok(self.select(&steps))
    }

    /// First `len` steps.
    pub fn truncate(&self, len: usize) -> Self {
        let steps: Vec<usize> = (0..len.min(self.len())).collect();
        self.select(&steps)
    }

    fn select(&self, steps: &[usize]) -> Self {
        let pick = |series: &Vec<f64>| steps.iter().map(|&t| series[t]).collect::<Vec<_>>();
        TimeSeriesSet {
            timestamps: steps.iter().map(|&t| self.timestamps[t]).collect(),
            demand: self.demand.iter().map(pick).collect(),
            capacity_factor: self
                .capacity_factor
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().map(pick).collect()))
                .collect(),
            hydro_inflow: self.hydro_inflow.iter().map(pick).collect(),
            hydro_energy_capacity: self.hydro_energy_capacity.clone(),
            hydro_power_capacity: self.hydro_power_capacity.clone(),
        }
    }

    /// Averages consecutive groups of `k` steps; the result represents
    /// `k`-hour snapshots (timestep weight `k`).
    pub fn aggregate(&self, k: usize) -> Result<Self, ModelError> {
        if k == 0 {
            return Err(ModelError::EmptySeries);
        }
        if self.len() % k != 0 {
            return Err(ModelError::LengthMismatch {
                file: PathBuf::from("<aggregate>"),
                expected: (self.len() / k + 1) * k,
                found: self.len(),
            });
        }
        let avg = |series: &Vec<f64>| {
            series
                .chunks(k)
                .map(|c| c.iter().sum::<f64>() / k as f64)
                .collect::<Vec<_>>()
        };
        Ok(TimeSeriesSet {
            timestamps: self.timestamps.iter().step_by(k).copied().collect(),
            demand: self.demand.iter().map(avg).collect(),
            capacity_factor: self
                .capacity_factor
                .iter()
                .map(|(c, v)| (c.clone(), v.iter().map(avg).collect()))
                .collect(),
            hydro_inflow: self.hydro_inflow.iter().map(avg).collect(),
            hydro_energy_capacity: self.hydro_energy_capacity.clone(),
            hydro_power_capacity: self.hydro_power_capacity.clone(),
        })
    }

    /// Sample mean of the demand series of region `n` in MW.
    pub fn mean_demand(&self, n: usize) -> f64 {
        let s = &self.demand[n];
        s.iter().sum::<f64>() / s.len() as f64
    }
}

/// Locations of the CSV inputs for [`load_timeseries`].
#[derive(Debug, Clone, PartialEq)]
pub struct DataPaths {
    pub demand: PathBuf,
    /// One file per weather-driven carrier.
    pub capacity_factor: BTreeMap<String, PathBuf>,
    /// `None` uses the bundled placeholder capacities.
    pub hydro: Option<PathBuf>,
    /// `None` means zero inflow everywhere.
    pub inflow: Option<PathBuf>,
}

impl DataPaths {
    /// Conventional file names inside `dir`; optional files are used only if present.
    pub fn in_dir(dir: &Path, network: &Network) -> Self {
        let optional = |name: &str| {
            let p = dir.join(name);
            p.exists().then_some(p)
        };
        DataPaths {
            demand: dir.join("demand.csv"),
            capacity_factor: network
                .carriers
                .iter()
                .filter(|c| c.uses_capacity_factor_series)
                .map(|c| {
                    (
                        c.name.clone(),
                        dir.join(format!("capacity_factor_{}.csv", c.name)),
                    )
                })
                .collect(),
            hydro: optional("hydro.csv"),
            inflow: optional("inflow.csv"),
        }
    }
}

struct RegionTable {
    timestamps: Vec<NaiveDateTime>,
    values: Vec<Vec<f64>>,
}

fn csv_err(file: &Path) -> impl Fn(csv::Error) -> ModelError + '_ {
    move |source| ModelError::Csv {
        file: file.to_owned(),
        source,
    }
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim().trim_end_matches('Z');
    NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT)
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M"))
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S"))
        .ok()
}

/// Reads a `timestamp,<region codes...>` table with bounds `[lo, hi]`.
fn read_region_table(
    file: &Path,
    network: &Network,
    lo: f64,
    hi: f64,
) -> Result<RegionTable, ModelError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(file)
        .map_err(csv_err(file))?;
    let headers = reader.headers().map_err(csv_err(file))?.clone();
    if headers.get(0) != Some("timestamp") {
        return Err(ModelError::InvalidCell {
            file: file.to_owned(),
            column: headers.get(0).unwrap_or("").to_owned(),
            row: 0,
            reason: "first column must be `timestamp`".into(),
        });
    }
    let mut columns = Vec::with_capacity(network.regions.len());
    let mut missing = Vec::new();
    for r in &network.regions {
        match headers.iter().position(|h| h == r.short_code) {
            Some(i) => columns.push(i),
            None => missing.push(r.short_code.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(ModelError::MissingRegions {
            file: file.to_owned(),
            missing,
        });
    }
    let mut timestamps = Vec::new();
    let mut values = vec![Vec::new(); network.regions.len()];
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(csv_err(file))?;
        let ts_text = record.get(0).unwrap_or("");
        let ts = parse_timestamp(ts_text).ok_or_else(|| ModelError::InvalidCell {
            file: file.to_owned(),
            column: "timestamp".into(),
            row,
            reason: format!("cannot parse ISO-8601 timestamp {ts_text:?}"),
        })?;
        if let Some(prev) = timestamps.last() {
            let step = ts - *prev;
            if step != TimeDelta::hours(1) {
                return Err(ModelError::NonUniformGrid {
                    file: file.to_owned(),
                    row,
                    reason: format!("step from {prev} to {ts}"),
                });
            }
        }
        timestamps.push(ts);
        for (n, &col) in columns.iter().enumerate() {
            let text = record.get(col).unwrap_or("");
            let cell = |reason: String| ModelError::InvalidCell {
                file: file.to_owned(),
                column: headers[col].to_owned(),
                row,
                reason,
            };
            let v: f64 = text
                .parse()
                .map_err(|_| cell(format!("not a number: {text:?}")))?;
            if !(v >= lo && v <= hi) {
                return Err(cell(format!("value {v} outside [{lo}, {hi}]")));
            }
            values[n].push(v);
        }
    }
    if timestamps.is_empty() {
        return Err(ModelError::EmptySeries);
    }
    Ok(RegionTable { timestamps, values })
}

#[derive(Deserialize)]
struct HydroRow {
    region: String,
    power_mw: f64,
    energy_mwh: f64,
}

fn read_hydro<R: std::io::Read>(
    reader: R,
    file: &Path,
    network: &Network,
) -> Result<(Vec<f64>, Vec<f64>), ModelError> {
    let nr = network.regions.len();
    let mut power = vec![0.0; nr];
    let mut energy = vec![0.0; nr];
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    for (i, row) in rdr.deserialize::<HydroRow>().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(csv_err(file))?;
        let Some(n) = network.region_index(&row.region) else {
            // The bundled table covers the default regions; custom networks
            // simply have no hydro where codes do not match.
            if file.as_os_str() == "<bundled hydro.csv>" {
                continue;
            }
            return Err(ModelError::UnknownRegion(row.region));
        };
        for (column, v) in [("power_mw", row.power_mw), ("energy_mwh", row.energy_mwh)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ModelError::InvalidCell {
                    file: file.to_owned(),
                    column: column.into(),
                    row: row_no,
                    reason: format!("value {v} must be finite and >= 0"),
                });
            }
        }
        power[n] = row.power_mw;
        energy[n] = row.energy_mwh;
    }
    Ok((power, energy))
}

/// Bundled per-region hydro power (MW) and energy (MWh) capacities.
///
/// These are placeholders, not measured reservoir data.
pub fn default_hydro(network: &Network) -> (Vec<f64>, Vec<f64>) {
    read_hydro(
        HYDRO_CSV.as_bytes(),
        Path::new("<bundled hydro.csv>"),
        network,
    )
    .expect("bundled hydro.csv is valid")
}

/// Loads and validates the CSV inputs described by `paths`.
pub fn load_timeseries(paths: &DataPaths, network: &Network) -> Result<TimeSeriesSet, ModelError> {
    let demand = read_region_table(&paths.demand, network, 0.0, f64::MAX)?;
    let t_len = demand.timestamps.len();
    let aligned = |file: &Path, table: &RegionTable| -> Result<(), ModelError> {
        if table.timestamps.len() != t_len {
            return Err(ModelError::LengthMismatch {
                file: file.to_owned(),
                expected: t_len,
                found: table.timestamps.len(),
            });
        }
        if let Some(row) = table
            .timestamps
            .iter()
            .zip(&demand.timestamps)
            .position(|(a, b)| a != b)
        {
            return Err(ModelError::MisalignedTimestamps {
                file: file.to_owned(),
                row: row + 1,
            });
        }
        Ok(())
    };

    let mut capacity_factor = BTreeMap::new();
    for carrier in network.carriers.iter().filter(|c| c.uses_capacity_factor_series) {
        let file = paths.capacity_factor.get(&carrier.name).ok_or_else(|| {
            ModelError::MissingRegions {
                file: PathBuf::from(format!("capacity_factor_{}.csv", carrier.name)),
                missing: network.regions.iter().map(|r| r.short_code.clone()).collect(),
            }
        })?;
        let table = read_region_table(file, network, 0.0, 1.0)?;
        aligned(file, &table)?;
        capacity_factor.insert(carrier.name.clone(), table.values);
    }

    let hydro_inflow = match &paths.inflow {
        Some(file) => {
            let table = read_region_table(file, network, 0.0, f64::MAX)?;
            aligned(file, &table)?;
            table.values
        }
        None => vec![vec![0.0; t_len]; network.regions.len()],
    };

    let (hydro_power_capacity, hydro_energy_capacity) = match &paths.hydro {
        Some(file) => {
            let f = std::fs::File::open(file).map_err(|source| ModelError::Io {
                file: file.clone(),
                source,
            })?;
            read_hydro(f, file, network)?
        }
        None => default_hydro(network),
    };

    let set = TimeSeriesSet {
        timestamps: demand.timestamps,
        demand: demand.values,
        capacity_factor,
        hydro_inflow,
        hydro_energy_capacity,
        hydro_power_capacity,
    };
    set.validate(network)?;
    Ok(set)
}

fn write_region_table<W: Write>(
    out: W,
    network: &Network,
    timestamps: &[NaiveDateTime],
    values: &[Vec<f64>],
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["timestamp".to_owned()];
    header.extend(network.regions.iter().map(|r| r.short_code.clone()));
    w.write_record(&header)?;
    for (t, ts) in timestamps.iter().enumerate() {
        let mut rec = vec![ts.format(TIMESTAMP_FORMAT).to_string()];
        rec.extend(values.iter().map(|s| s[t].to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `set` in the layout read by [`load_timeseries`] and returns the paths.
pub fn write_timeseries(
    set: &TimeSeriesSet,
    network: &Network,
    dir: &Path,
) -> Result<DataPaths, ModelError> {
    std::fs::create_dir_all(dir).map_err(|source| ModelError::Io {
        file: dir.to_owned(),
        source,
    })?;
    let create = |path: &Path| {
        std::fs::File::create(path).map_err(|source| ModelError::Io {
            file: path.to_owned(),
            source,
        })
    };
    let paths = DataPaths {
        demand: dir.join("demand.csv"),
        capacity_factor: set
            .capacity_factor
            .keys()
            .map(|c| (c.clone(), dir.join(format!("capacity_factor_{c}.csv"))))
            .collect(),
        hydro: Some(dir.join("hydro.csv")),
        inflow: Some(dir.join("inflow.csv")),
    };
    write_region_table(create(&paths.demand)?, network, &set.timestamps, &set.demand)
        .map_err(csv_err(&paths.demand))?;
    for (carrier, path) in &paths.capacity_factor {
        write_region_table(
            create(path)?,
            network,
            &set.timestamps,
            &set.capacity_factor[carrier],
        )
        .map_err(csv_err(path))?;
    }
    let inflow = paths.inflow.as_ref().unwrap();
    write_region_table(create(inflow)?, network, &set.timestamps, &set.hydro_inflow)
        .map_err(csv_err(inflow))?;
    let hydro = paths.hydro.as_ref().unwrap();
    let mut w = csv::Writer::from_writer(create(hydro)?);
    w.write_record(["region", "power_mw", "energy_mwh"])
        .map_err(csv_err(hydro))?;
    for (n, r) in network.regions.iter().enumerate() {
        w.write_record([
            r.short_code.clone(),
            set.hydro_power_capacity[n].to_string(),
            set.hydro_energy_capacity[n].to_string(),
        ])
        .map_err(csv_err(hydro))?;
    }
    w.flush().map_err(|source| ModelError::Io {
        file: hydro.clone(),
        source,
    })?;
    Ok(paths)
}

/// Serialises `set` to a single deterministic text blob (demand, factors, inflow, hydro).
pub fn to_csv_bytes(set: &TimeSeriesSet, network: &Network) -> Vec<u8> {
    let mut buf = Vec::new();
    write_region_table(&mut buf, network, &set.timestamps, &set.demand).unwrap();
    for table in set.capacity_factor.values() {
        write_region_table(&mut buf, network, &set.timestamps, table).unwrap();
    }
    write_region_table(&mut buf, network, &set.timestamps, &set.hydro_inflow).unwrap();
    for n in 0..network.regions.len() {
        writeln!(
            buf,
            "{},{}",
            set.hydro_power_capacity[n], set.hydro_energy_capacity[n]
        )
        .unwrap();
    }
    buf
}
