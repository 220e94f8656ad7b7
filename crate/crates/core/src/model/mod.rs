//! Network data model: regions, links, carriers and the bundled default network.
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use thiserror::Error;

mod synthetic;
mod timeseries;

pub use synthetic::{synthetic_timeseries, synthetic_year};
pub use timeseries::{
    default_hydro, load_timeseries, to_csv_bytes, write_timeseries, DataPaths, TimeSeriesSet,
};

const REGIONS_CSV: &str = include_str!("../../data/regions.csv");
const LINKS_CSV: &str = include_str!("../../data/links.csv");
const CARRIERS_CSV: &str = include_str!("../../data/carriers.csv");

/// Errors raised while building or loading model data.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid region {name}: {reason}")]
    InvalidRegion { name: String, reason: String },
    #[error("duplicate region short code {0}")]
    DuplicateShortCode(String),
    #[error("invalid link {from}-{to}: {reason}")]
    InvalidLink {
        from: String,
        to: String,
        reason: String,
    },
    #[error("invalid carrier {name}: {reason}")]
    InvalidCarrier { name: String, reason: String },
    #[error("network is not connected; unreachable regions: {0:?}")]
    Disconnected(Vec<String>),
    #[error("unknown region short code {0}")]
    UnknownRegion(String),
    #[error("{file}: missing region columns {missing:?}")]
    MissingRegions { file: PathBuf, missing: Vec<String> },
    #[error("{file}, column {column}, row {row}: {reason}")]
    InvalidCell {
        file: PathBuf,
        column: String,
        row: usize,
        reason: String,
    },
    #[error("{file}, row {row}: timestamp grid is not uniform hourly ({reason})")]
    NonUniformGrid {
        file: PathBuf,
        row: usize,
        reason: String,
    },
    #[error("{file}: length mismatch, expected {expected} rows, found {found}")]
    LengthMismatch {
        file: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("{file}: timestamps differ from demand.csv at row {row}")]
    MisalignedTimestamps { file: PathBuf, row: usize },
    #[error("time series must contain at least one step")]
    EmptySeries,
    #[error("{file}: {source}")]
    Csv {
        file: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{file}: {source}")]
    Io {
        file: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One aggregated network node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: usize,
    pub name: String,
    pub short_code: String,
    /// GDP per capita in monetary units per person.
    pub gdp_per_capita: f64,
    pub population: f64,
    /// Mean hourly demand in GW.
    pub mean_demand: f64,
}

/// A transmission link between two regions (indices into `Network::regions`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub from_region: usize,
    pub to_region: usize,
    /// Capacity in MW, usable in either direction.
    pub capacity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CarrierKind {
    Generator,
    Storage,
}

/// Techno-economic description of a generation or storage technology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarrierSpec {
    pub name: String,
    pub kind: CarrierKind,
    /// Annualised capital cost in mu/MW/a.
    pub capital_cost: f64,
    /// mu/MWh
    pub marginal_cost: f64,
    /// tCO2/MWh
    pub emission_factor: f64,
    pub extendable: bool,
    pub uses_capacity_factor_series: bool,
    pub charge_efficiency: f64,
    pub discharge_efficiency: f64,
    pub standing_efficiency: f64,
    /// Energy-to-power ratio in hours; storage only.
    pub energy_to_power_hours: Option<f64>,
}

impl CarrierSpec {
    pub fn is_generator(&self) -> bool {
        self.kind == CarrierKind::Generator
    }

    pub fn is_storage(&self) -> bool {
        self.kind == CarrierKind::Storage
    }

    /// Extendable storage whose energy capacity scales with its power capacity.
    pub fn is_battery_like(&self) -> bool {
        self.is_storage() && self.extendable
    }

    /// Fixed-capacity storage fed by external inflow (reservoir hydro).
    pub fn is_reservoir(&self) -> bool {
        self.is_storage() && !self.extendable
    }

    pub fn is_conventional(&self) -> bool {
        self.emission_factor > 0.0
    }

    fn validate(&self) -> Result<(), ModelError> {
        let fail = |reason: &str| {
            Err(ModelError::InvalidCarrier {
                name: self.name.clone(),
                reason: reason.to_owned(),
            })
        };
        if !(self.capital_cost >= 0.0 && self.capital_cost.is_finite()) {
            return fail("capital_cost must be finite and >= 0");
        }
        if !(self.marginal_cost >= 0.0 && self.marginal_cost.is_finite()) {
            return fail("marginal_cost must be finite and >= 0");
        }
        if !(self.emission_factor >= 0.0 && self.emission_factor.is_finite()) {
            return fail("emission_factor must be finite and >= 0");
        }
        for eff in [
            self.charge_efficiency,
            self.discharge_efficiency,
            self.standing_efficiency,
        ] {
            if !(eff > 0.0 && eff <= 1.0) {
                return fail("efficiencies must lie in (0, 1]");
            }
        }
        if self.is_battery_like() {
            match self.energy_to_power_hours {
                Some(h) if h > 0.0 && h.is_finite() => {}
                _ => return fail("extendable storage needs energy_to_power_hours > 0"),
            }
        }
        Ok(())
    }
}

/// Regions, links and carriers with the link incidence structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub regions: Vec<Region>,
    pub links: Vec<Link>,
    pub carriers: Vec<CarrierSpec>,
}

impl Network {
    /// Validates and assembles a network.
    pub fn new(
        regions: Vec<Region>,
        links: Vec<Link>,
        carriers: Vec<CarrierSpec>,
    ) -> Result<Self, ModelError> {
        let mut codes = BTreeSet::new();
        for r in &regions {
            let bad = |reason: &str| ModelError::InvalidRegion {
                name: r.name.clone(),
                reason: reason.to_owned(),
            };
            if !(r.gdp_per_capita > 0.0 && r.gdp_per_capita.is_finite()) {
                return Err(bad("gdp_per_capita must be > 0"));
            }
            if !(r.population > 0.0 && r.population.is_finite()) {
                return Err(bad("population must be > 0"));
            }
            if !(r.mean_demand > 0.0 && r.mean_demand.is_finite()) {
                return Err(bad("mean_demand must be > 0"));
            }
            if !codes.insert(r.short_code.clone()) {
                return Err(ModelError::DuplicateShortCode(r.short_code.clone()));
            }
        }
        let code = |i: usize| {
            regions
                .get(i)
                .map(|r| r.short_code.clone())
                .unwrap_or_else(|| format!("#{i}"))
        };
        let mut pairs = BTreeSet::new();
        for l in &links {
            let bad = |reason: &str| ModelError::InvalidLink {
                from: code(l.from_region),
                to: code(l.to_region),
                reason: reason.to_owned(),
            };
            if l.from_region >= regions.len() || l.to_region >= regions.len() {
                return Err(bad("endpoint out of range"));
            }
            if l.from_region == l.to_region {
                return Err(bad("self loop"));
            }
            if !(l.capacity > 0.0 && l.capacity.is_finite()) {
                return Err(bad("capacity must be > 0"));
            }
            let key = (
                l.from_region.min(l.to_region),
                l.from_region.max(l.to_region),
            );
            if !pairs.insert(key) {
                return Err(bad("duplicate link for region pair"));
            }
        }
        let mut names = BTreeSet::new();
        for c in &carriers {
            c.validate()?;
            if !names.insert(c.name.clone()) {
                return Err(ModelError::InvalidCarrier {
                    name: c.name.clone(),
                    reason: "duplicate carrier name".into(),
                });
            }
        }
        let network = Network {
            regions,
            links,
            carriers,
        };
        let unreachable = network.unreachable_regions();
        if !unreachable.is_empty() {
            return Err(ModelError::Disconnected(unreachable));
        }
        Ok(network)
    }

    fn unreachable_regions(&self) -> Vec<String> {
        if self.regions.is_empty() {
            return Vec::new();
        }
        let mut seen = vec![false; self.regions.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for l in &self.links {
                let other = if l.from_region == n {
                    l.to_region
                } else if l.to_region == n {
                    l.from_region
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    stack.push(other);
                }
            }
        }
        self.regions
            .iter()
            .zip(seen)
            .filter(|(_, s)| !s)
            .map(|(r, _)| r.short_code.clone())
            .collect()
    }

    pub fn region_index(&self, short_code: &str) -> Option<usize> {
        self.regions.iter().position(|r| r.short_code == short_code)
    }

    pub fn carrier_index(&self, name: &str) -> Option<usize> {
        self.carriers.iter().position(|c| c.name == name)
    }

    /// Incidence entry K[n, l]: +1 at the link's origin, -1 at its destination.
    pub fn incidence(&self, region: usize, link: usize) -> i8 {
        let l = &self.links[link];
        if l.from_region == region {
            1
        } else if l.to_region == region {
            -1
        } else {
            0
        }
    }

    /// Column `l` of the incidence matrix as its two non-zero entries.
    pub fn incidence_column(&self, link: usize) -> [(usize, i8); 2] {
        let l = &self.links[link];
        [(l.from_region, 1), (l.to_region, -1)]
    }

    pub fn link_name(&self, link: usize) -> String {
        let l = &self.links[link];
        format!(
            "{}-{}",
            self.regions[l.from_region].short_code, self.regions[l.to_region].short_code
        )
    }

    pub fn total_link_capacity(&self) -> f64 {
        self.links.iter().map(|l| l.capacity).sum()
    }

    /// Returns a copy restricted to the named carriers (order preserved).
    pub fn with_carriers(&self, names: &[&str]) -> Result<Network, ModelError> {
        let mut carriers = Vec::with_capacity(names.len());
        for name in names {
            let c = self
                .carriers
                .iter()
                .find(|c| c.name == *name)
                .ok_or_else(|| ModelError::InvalidCarrier {
                    name: (*name).to_owned(),
                    reason: "not present in network".into(),
                })?;
            carriers.push(c.clone());
        }
        Network::new(self.regions.clone(), self.links.clone(), carriers)
    }
}

#[derive(Deserialize)]
struct RegionRow {
    id: usize,
    name: String,
    short_code: String,
    gdp_per_capita: f64,
    population: f64,
    mean_demand_gw: f64,
}

#[derive(Deserialize)]
struct LinkRow {
    from: String,
    to: String,
    capacity_mw: f64,
}

#[derive(Deserialize)]
struct CarrierRow {
    name: String,
    kind: CarrierKind,
    capital_cost: f64,
    marginal_cost: f64,
    emission_factor: f64,
    extendable: bool,
    uses_capacity_factor_series: bool,
    charge_efficiency: f64,
    discharge_efficiency: f64,
    standing_efficiency: f64,
    energy_to_power_hours: Option<f64>,
}

fn bundled<T: serde::de::DeserializeOwned>(name: &str, text: &str) -> Vec<T> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .unwrap_or_else(|e| panic!("bundled {name} is malformed: {e}"))
}

/// The 11-region, 21-link European network with wind, solar, hydro, coal,
/// gas and battery carriers.
pub fn default_network() -> Network {
    let regions: Vec<Region> = bundled::<RegionRow>("regions.csv", REGIONS_CSV)
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            debug_assert_eq!(r.id, i + 1);
            Region {
                id: i,
                name: r.name,
                short_code: r.short_code,
                gdp_per_capita: r.gdp_per_capita,
                population: r.population,
                mean_demand: r.mean_demand_gw,
            }
        })
        .collect();
    let index: HashMap<&str, usize> = regions
        .iter()
        .map(|r| (r.short_code.as_str(), r.id))
        .collect();
    let links = bundled::<LinkRow>("links.csv", LINKS_CSV)
        .into_iter()
        .map(|l| Link {
            from_region: index[l.from.as_str()],
            to_region: index[l.to.as_str()],
            capacity: l.capacity_mw,
        })
        .collect();
    let carriers = bundled::<CarrierRow>("carriers.csv", CARRIERS_CSV)
        .into_iter()
        .map(|c| CarrierSpec {
            name: c.name,
            kind: c.kind,
            capital_cost: c.capital_cost,
            marginal_cost: c.marginal_cost,
            emission_factor: c.emission_factor,
            extendable: c.extendable,
            uses_capacity_factor_series: c.uses_capacity_factor_series,
            charge_efficiency: c.charge_efficiency,
            discharge_efficiency: c.discharge_efficiency,
            standing_efficiency: c.standing_efficiency,
            energy_to_power_hours: c.energy_to_power_hours,
        })
        .collect();
    Network::new(regions, links, carriers).expect("bundled network is valid")
}
