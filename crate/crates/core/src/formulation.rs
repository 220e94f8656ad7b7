//! Greenfield capacity-expansion and dispatch LP.
//!
//! Columns: capacities `cap[n,s]`, generator dispatch `gen[n,s,t]`, storage
//! `store`/`dispatch`/`soc` (plus `spill` where there is inflow) and link
//! flows `flow[l,t]`. Rows: nodal balance `bal[n,t]`, generation potential
//! `pot[n,s,t]`, battery power and energy limits, and the state-of-charge
//! recursion `soc_bal[n,s,t]`. Carbon prices enter as extra marginal cost
//! on emitting carriers.
use crate::lp::{LinearProgram, LpError, Sense};
use crate::model::{CarrierSpec, ModelError, Network, TimeSeriesSet};
use crate::pricing::PricingScheme;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

pub const HOURS_PER_YEAR: f64 = 8760.0;

#[derive(Debug, Error)]
pub enum FormulationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("inputs are not aligned: {0}")]
    Unaligned(String),
    #[error("invalid option: {0}")]
    InvalidOption(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FormulationOptions {
    /// Close the state-of-charge recursion over the horizon.
    pub cyclic_storage: bool,
    /// Initial state of charge as a fraction of energy capacity, used when not cyclic.
    pub initial_soc_fraction: f64,
    /// Overrides the energy-to-power ratio of extendable storage.
    pub battery_hours: Option<f64>,
    /// Hours represented by one step.
    pub timestep_weight: f64,
    /// Scale operating terms so the horizon stands in for a full year.
    pub annualize: bool,
}

impl Default for FormulationOptions {
    fn default() -> Self {
        FormulationOptions {
            cyclic_storage: true,
            initial_soc_fraction: 0.5,
            battery_hours: None,
            timestep_weight: 1.0,
            annualize: true,
        }
    }
}

impl FormulationOptions {
    fn validate(&self) -> Result<(), FormulationError> {
        if !(self.timestep_weight >= 1.0 && self.timestep_weight.is_finite()) {
            return Err(FormulationError::InvalidOption(format!(
                "timestep_weight {} must be >= 1",
                self.timestep_weight
            )));
        }
        if let Some(h) = self.battery_hours {
            if !(h > 0.0 && h.is_finite()) {
                return Err(FormulationError::InvalidOption(format!(
                    "battery_hours {h} must be > 0"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.initial_soc_fraction) {
            return Err(FormulationError::InvalidOption(
                "initial_soc_fraction must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Hours of the year represented by one step: `w * 8760 / (T * w)` when
    /// annualising, else `w`.
    pub fn snapshot_weight(&self, steps: usize) -> f64 {
        if self.annualize {
            self.timestep_weight * HOURS_PER_YEAR / (steps as f64 * self.timestep_weight)
        } else {
            self.timestep_weight
        }
    }
}

/// Everything that determines one LP.
#[derive(Debug, Clone)]
pub struct ScenarioInputs {
    pub network: Arc<Network>,
    pub series: Arc<TimeSeriesSet>,
    pub pricing: PricingScheme,
    pub options: FormulationOptions,
}

impl ScenarioInputs {
    pub fn new(
        network: Arc<Network>,
        series: Arc<TimeSeriesSet>,
        pricing: PricingScheme,
        options: FormulationOptions,
    ) -> Result<Self, FormulationError> {
        let inputs = ScenarioInputs {
            network,
            series,
            pricing,
            options,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn validate(&self) -> Result<(), FormulationError> {
        self.options.validate()?;
        self.series.validate(&self.network)?;
        if self.pricing.effective_price.len() != self.network.regions.len() {
            return Err(FormulationError::Unaligned(format!(
                "{} carbon prices for {} regions",
                self.pricing.effective_price.len(),
                self.network.regions.len()
            )));
        }
        if let Some(c) = self
            .network
            .carriers
            .iter()
            .find(|c| c.is_generator() && !c.extendable)
        {
            return Err(FormulationError::Unaligned(format!(
                "generator {} must be extendable (greenfield model)",
                c.name
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.series.len()
    }

    pub fn snapshot_weight(&self) -> f64 {
        self.options.snapshot_weight(self.steps())
    }

    pub fn battery_hours(&self, carrier: &CarrierSpec) -> f64 {
        self.options
            .battery_hours
            .or(carrier.energy_to_power_hours)
            .unwrap_or(0.0)
    }

    /// Whether reservoir storage exists at region `n`.
    pub fn has_reservoir(&self, n: usize) -> bool {
        self.series.hydro_power_capacity[n] > 0.0
    }

    fn has_inflow(&self, n: usize) -> bool {
        self.series.hydro_inflow[n].iter().any(|v| *v > 0.0)
    }
}

/// `o_s + mu_n * e_s` in mu/MWh.
pub fn effective_marginal_cost(carrier: &CarrierSpec, region_price: f64) -> f64 {
    carrier.marginal_cost + region_price * carrier.emission_factor
}

/// Column and row indices of the structured LP, `[region][carrier][t]` etc.
#[derive(Debug, Clone, Default)]
pub struct LpIndex {
    pub cap: Vec<Vec<Option<usize>>>,
    pub gen: Vec<Vec<Option<Vec<usize>>>>,
    pub store: Vec<Vec<Option<Vec<usize>>>>,
    pub dispatch: Vec<Vec<Option<Vec<usize>>>>,
    pub soc: Vec<Vec<Option<Vec<usize>>>>,
    pub spill: Vec<Vec<Option<Vec<usize>>>>,
    pub flow: Vec<Vec<usize>>,
    pub balance: Vec<Vec<usize>>,
    pub soc_balance: Vec<Vec<Option<Vec<usize>>>>,
}

/// A built LP with its index and the snapshot weight used.
#[derive(Debug, Clone)]
pub struct FormulatedLp {
    pub lp: LinearProgram,
    pub index: LpIndex,
    /// Hours of the year represented by one step.
    pub snapshot_weight: f64,
}

/// Closed-form row/column counts per name family.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Census {
    pub rows: BTreeMap<String, usize>,
    pub columns: BTreeMap<String, usize>,
}

impl Census {
    pub fn total_rows(&self) -> usize {
        self.rows.values().sum()
    }

    pub fn total_columns(&self) -> usize {
        self.columns.values().sum()
    }
}

/// Row and column counts `build_lp` will emit, derived from the inputs alone.
pub fn census(inputs: &ScenarioInputs) -> Census {
    let net = &inputs.network;
    let t = inputs.steps();
    let nr = net.regions.len();
    let mut c = Census::default();
    let add = |map: &mut BTreeMap<String, usize>, k: &str, v: usize| {
        if v > 0 {
            *map.entry(k.to_owned()).or_insert(0) += v;
        }
    };
    let generators = net.carriers.iter().filter(|s| s.is_generator()).count();
    let batteries = net.carriers.iter().filter(|s| s.is_battery_like()).count();
    let reservoir_carriers = net.carriers.iter().filter(|s| s.is_reservoir()).count();
    let reservoirs = (0..nr).filter(|&n| inputs.has_reservoir(n)).count() * reservoir_carriers;
    let spills = (0..nr)
        .filter(|&n| inputs.has_reservoir(n) && inputs.has_inflow(n))
        .count()
        * reservoir_carriers;
    let extendable = net.carriers.iter().filter(|s| s.extendable).count();

    add(&mut c.rows, "bal", nr * t);
    add(&mut c.rows, "pot", nr * generators * t);
    add(&mut c.rows, "store_cap", nr * batteries * t);
    add(&mut c.rows, "dispatch_cap", nr * batteries * t);
    add(&mut c.rows, "energy_cap", nr * batteries * t);
    add(&mut c.rows, "soc_bal", (nr * batteries + reservoirs) * t);

    add(&mut c.columns, "cap", nr * extendable);
    add(&mut c.columns, "gen", nr * generators * t);
    add(&mut c.columns, "store", nr * batteries * t);
    add(&mut c.columns, "dispatch", (nr * batteries + reservoirs) * t);
    add(&mut c.columns, "soc", (nr * batteries + reservoirs) * t);
    add(&mut c.columns, "spill", spills * t);
    add(&mut c.columns, "flow", net.links.len() * t);
    c
}

/// Builds the LP for one scenario.
pub fn build_lp(inputs: &ScenarioInputs) -> Result<FormulatedLp, FormulationError> {
    inputs.validate()?;
    let net = &*inputs.network;
    let series = &*inputs.series;
    let opts = &inputs.options;
    let t_len = inputs.steps();
    let nr = net.regions.len();
    let ns = net.carriers.len();
    let w = opts.timestep_weight;
    let weight = inputs.snapshot_weight();
    let inf = f64::INFINITY;

    let mut lp = LinearProgram::new();
    let mut idx = LpIndex {
        cap: vec![vec![None; ns]; nr],
        gen: vec![vec![None; ns]; nr],
        store: vec![vec![None; ns]; nr],
        dispatch: vec![vec![None; ns]; nr],
        soc: vec![vec![None; ns]; nr],
        spill: vec![vec![None; ns]; nr],
        flow: Vec::with_capacity(net.links.len()),
        balance: Vec::with_capacity(nr),
        soc_balance: vec![vec![None; ns]; nr],
    };

    for (n, region) in net.regions.iter().enumerate() {
        let rc = &region.short_code;
        let price = inputs.pricing.effective_price[n];
        for (s, carrier) in net.carriers.iter().enumerate() {
            let cn = &carrier.name;
            if carrier.is_reservoir() && !inputs.has_reservoir(n) {
                continue;
            }
            if carrier.extendable {
                idx.cap[n][s] = Some(lp.add_column(
                    format!("cap[{rc},{cn}]"),
                    0.0,
                    inf,
                    carrier.capital_cost,
                )?);
            }
            let cost = weight * effective_marginal_cost(carrier, price);
            if carrier.is_generator() {
                let cols = (0..t_len)
                    .map(|t| lp.add_column(format!("gen[{rc},{cn},{t}]"), 0.0, inf, cost))
                    .collect::<Result<Vec<_>, _>>()?;
                idx.gen[n][s] = Some(cols);
                continue;
            }
            // storage
            let reservoir = carrier.is_reservoir();
            let (dispatch_max, energy_max) = if reservoir {
                (
                    series.hydro_power_capacity[n],
                    series.hydro_energy_capacity[n],
                )
            } else {
                (inf, inf)
            };
            if !reservoir {
                let cols = (0..t_len)
                    .map(|t| lp.add_column(format!("store[{rc},{cn},{t}]"), 0.0, inf, 0.0))
                    .collect::<Result<Vec<_>, _>>()?;
                idx.store[n][s] = Some(cols);
            }
            let cols = (0..t_len)
                .map(|t| {
                    lp.add_column(format!("dispatch[{rc},{cn},{t}]"), 0.0, dispatch_max, cost)
                })
                .collect::<Result<Vec<_>, _>>()?;
            idx.dispatch[n][s] = Some(cols);
            let cols = (0..t_len)
                .map(|t| lp.add_column(format!("soc[{rc},{cn},{t}]"), 0.0, energy_max, 0.0))
                .collect::<Result<Vec<_>, _>>()?;
            idx.soc[n][s] = Some(cols);
            if reservoir && inputs.has_inflow(n) {
                let cols = (0..t_len)
                    .map(|t| lp.add_column(format!("spill[{rc},{cn},{t}]"), 0.0, inf, 0.0))
                    .collect::<Result<Vec<_>, _>>()?;
                idx.spill[n][s] = Some(cols);
            }
        }
    }

    for (l, link) in net.links.iter().enumerate() {
        let name = net.link_name(l);
        let cols = (0..t_len)
            .map(|t| lp.add_column(format!("flow[{name},{t}]"), -link.capacity, link.capacity, 0.0))
            .collect::<Result<Vec<_>, _>>()?;
        idx.flow.push(cols);
    }

    // Nodal balance, scaled by the snapshot weight so duals read in mu/MWh.
    for (n, region) in net.regions.iter().enumerate() {
        let rc = &region.short_code;
        let mut rows = Vec::with_capacity(t_len);
        for t in 0..t_len {
            let mut entries = Vec::new();
            for s in 0..ns {
                if let Some(g) = &idx.gen[n][s] {
                    entries.push((g[t], weight));
                }
                if let Some(d) = &idx.dispatch[n][s] {
                    entries.push((d[t], weight));
                }
                if let Some(st) = &idx.store[n][s] {
                    entries.push((st[t], -weight));
                }
            }
            for l in 0..net.links.len() {
                let k = net.incidence(n, l);
                if k != 0 {
                    entries.push((idx.flow[l][t], -weight * k as f64));
                }
            }
            rows.push(lp.add_row(
                format!("bal[{rc},{t}]"),
                Sense::Eq,
                weight * series.demand[n][t],
                &entries,
            )?);
        }
        idx.balance.push(rows);
    }

    for (n, region) in net.regions.iter().enumerate() {
        let rc = &region.short_code;
        for (s, carrier) in net.carriers.iter().enumerate() {
            let cn = &carrier.name;
            if let (Some(gen), Some(cap)) = (&idx.gen[n][s], idx.cap[n][s]) {
                for t in 0..t_len {
                    let potential = series.potential(cn, n, t);
                    lp.add_row(
                        format!("pot[{rc},{cn},{t}]"),
                        Sense::Le,
                        0.0,
                        &[(gen[t], 1.0), (cap, -potential)],
                    )?;
                }
            }
            let (Some(dispatch), Some(soc)) = (&idx.dispatch[n][s], &idx.soc[n][s]) else {
                continue;
            };
            let store = idx.store[n][s].as_ref();
            let spill = idx.spill[n][s].as_ref();
            let cap = idx.cap[n][s];
            let hours = inputs.battery_hours(carrier);
            if let (Some(store), Some(cap)) = (store, cap) {
                for t in 0..t_len {
                    lp.add_row(
                        format!("store_cap[{rc},{cn},{t}]"),
                        Sense::Le,
                        0.0,
                        &[(store[t], 1.0), (cap, -1.0)],
                    )?;
                    lp.add_row(
                        format!("dispatch_cap[{rc},{cn},{t}]"),
                        Sense::Le,
                        0.0,
                        &[(dispatch[t], 1.0), (cap, -1.0)],
                    )?;
                    lp.add_row(
                        format!("energy_cap[{rc},{cn},{t}]"),
                        Sense::Le,
                        0.0,
                        &[(soc[t], 1.0), (cap, -hours)],
                    )?;
                }
            }
            let standing = carrier.standing_efficiency.powf(w);
            let mut rows = Vec::with_capacity(t_len);
            for t in 0..t_len {
                let mut entries = vec![(soc[t], 1.0)];
                let mut rhs = 0.0;
                if t > 0 {
                    entries.push((soc[t - 1], -standing));
                } else if opts.cyclic_storage {
                    entries.push((soc[t_len - 1], -standing));
                } else {
                    let f = opts.initial_soc_fraction;
                    match cap {
                        Some(cap) if !carrier.is_reservoir() => {
                            entries.push((cap, -standing * f * hours))
                        }
                        _ => rhs += standing * f * series.hydro_energy_capacity[n],
                    }
                }
                if let Some(store) = store {
                    entries.push((store[t], -w * carrier.charge_efficiency));
                }
                entries.push((dispatch[t], w / carrier.discharge_efficiency));
                if let Some(spill) = spill {
                    entries.push((spill[t], w));
                }
                if carrier.is_reservoir() {
                    rhs += w * series.hydro_inflow[n][t];
                }
                rows.push(lp.add_row(
                    format!("soc_bal[{rc},{cn},{t}]"),
                    Sense::Eq,
                    rhs,
                    &entries,
                )?);
            }
            idx.soc_balance[n][s] = Some(rows);
        }
    }

    Ok(FormulatedLp {
        lp,
        index: idx,
        snapshot_weight: weight,
    })
}
