//! Cost, price and capacity accounting of a solved scenario.
//!
//! Prices are the balance-row duals in mu/MWh. With `W` hours represented by
//! each step, a region's consumers pay `sum_t lambda d W`, producers earn
//! `sum_t lambda (g + dispatch - store) W` and link `l` collects
//! `sum_t (lambda_to - lambda_from) f W`. Net profit is system cost plus the
//! scarcity rent of fixed assets (hydro) minus consumer cost, so that net
//! profits and congestion rents sum to zero at an optimum.
use crate::formulation::{FormulatedLp, ScenarioInputs};
use crate::model::Network;
use crate::solver::Solution;
use crate::tracing::AllocationResult;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("solution carries no duals; prices are unavailable")]
    MissingDuals,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegionCosts {
    /// Capital plus operating cost incl. carbon, mu/a.
    pub system_cost: f64,
    pub capital_cost: f64,
    pub operating_cost: f64,
    /// Carbon part of the operating cost, mu/a.
    pub carbon_payment: f64,
    /// `sum_t lambda d W`, mu/a.
    pub consumer_cost: f64,
    /// Consumer cost per MWh of load, mu/MWh.
    pub consumer_lcoe: f64,
    /// Market revenue of non-extendable assets net of their cost, mu/a.
    pub resource_rent: f64,
    /// `system_cost + resource_rent - consumer_cost`, mu/a.
    pub net_profit: f64,
    pub demand_mwh: f64,
    /// Energy imported minus exported, MWh/a.
    pub net_import_mwh: f64,
    /// Demand-weighted average price, mu/MWh.
    pub mean_price: f64,
    /// Traced CO2 consumed minus produced, tCO2/a (when traced).
    pub co2_net_import: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinkCosts {
    /// `sum_t (lambda_to - lambda_from) f W`, mu/a.
    pub congestion_rent: f64,
    /// `sum_t |f| W`, MWh/a.
    pub energy_mwh: f64,
    /// Share of steps with `|f|` within `1e-6` relative of capacity.
    pub congested_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub regions: Vec<RegionCosts>,
    pub links: Vec<LinkCosts>,
    pub total_system_cost: f64,
    pub total_consumer_cost: f64,
    pub total_demand_mwh: f64,
    /// Total system cost per MWh of load, mu/MWh.
    pub total_lcoe: f64,
    pub conventional_share: f64,
}

impl CostReport {
    /// `|sum net_profit + sum congestion_rent| / max(1, total system cost)`.
    pub fn closure_residual(&self) -> f64 {
        let np: f64 = self.regions.iter().map(|r| r.net_profit).sum();
        let cr: f64 = self.links.iter().map(|l| l.congestion_rent).sum();
        (np + cr).abs() / self.total_system_cost.abs().max(1.0)
    }

    /// Fills the traced carbon import column.
    pub fn attach_co2(&mut self, allocation: &AllocationResult) {
        for (r, v) in self.regions.iter_mut().zip(allocation.co2_net_import()) {
            r.co2_net_import = Some(v);
        }
    }
}

fn energy(cols: &Option<Vec<usize>>, x: &[f64]) -> f64 {
    cols.as_ref()
        .map_or(0.0, |c| c.iter().map(|&j| x[j]).sum())
}

/// Regional and link accounting of `solution`.
pub fn cost_report(
    inputs: &ScenarioInputs,
    formulated: &FormulatedLp,
    solution: &Solution,
) -> Result<CostReport, MetricsError> {
    let y = solution.dual.as_ref().ok_or(MetricsError::MissingDuals)?;
    let net = &*inputs.network;
    let idx = &formulated.index;
    let x = &solution.primal;
    let lp = &formulated.lp;
    let w = formulated.snapshot_weight;
    let steps = inputs.steps();
    let price = |n: usize, t: usize| y[idx.balance[n][t]];

    let mut regions = Vec::with_capacity(net.regions.len());
    for n in 0..net.regions.len() {
        let mut r = RegionCosts::default();
        for (s, carrier) in net.carriers.iter().enumerate() {
            if let Some(j) = idx.cap[n][s] {
                r.capital_cost += lp.columns()[j].cost * x[j];
            }
            for cols in [&idx.gen[n][s], &idx.dispatch[n][s]] {
                if let Some(cols) = cols {
                    for &j in cols {
                        r.operating_cost += lp.columns()[j].cost * x[j];
                    }
                }
                let e = energy(cols, x) * w;
                r.carbon_payment += e * carrier.emission_factor * inputs.pricing.effective_price[n];
            }
            if !carrier.extendable {
                let cost: f64 = [&idx.gen[n][s], &idx.dispatch[n][s]]
                    .into_iter()
                    .flatten()
                    .flatten()
                    .map(|&j| lp.columns()[j].cost * x[j])
                    .sum();
                let mut revenue = 0.0;
                for t in 0..steps {
                    let mut p = 0.0;
                    for cols in [&idx.gen[n][s], &idx.dispatch[n][s]].into_iter().flatten() {
                        p += x[cols[t]];
                    }
                    if let Some(store) = &idx.store[n][s] {
                        p -= x[store[t]];
                    }
                    revenue += price(n, t) * p * w;
                }
                r.resource_rent += revenue - cost;
            }
        }
        r.system_cost = r.capital_cost + r.operating_cost;
        for t in 0..steps {
            let d = inputs.series.demand[n][t];
            r.consumer_cost += price(n, t) * d * w;
            r.demand_mwh += d * w;
        }
        r.consumer_lcoe = if r.demand_mwh > 0.0 {
            r.consumer_cost / r.demand_mwh
        } else {
            0.0
        };
        r.mean_price = r.consumer_lcoe;
        r.net_profit = r.system_cost + r.resource_rent - r.consumer_cost;
        regions.push(r);
    }

    let mut links = Vec::with_capacity(net.links.len());
    for (l, link) in net.links.iter().enumerate() {
        let mut c = LinkCosts::default();
        let mut congested = 0usize;
        for t in 0..steps {
            let f = x[idx.flow[l][t]];
            c.congestion_rent += (price(link.to_region, t) - price(link.from_region, t)) * f * w;
            c.energy_mwh += f.abs() * w;
            if f.abs() >= link.capacity * (1.0 - 1e-6) {
                congested += 1;
            }
            regions[link.from_region].net_import_mwh -= f * w;
            regions[link.to_region].net_import_mwh += f * w;
        }
        c.congested_fraction = if steps > 0 {
            congested as f64 / steps as f64
        } else {
            0.0
        };
        links.push(c);
    }

    let total_system_cost: f64 = regions.iter().map(|r| r.system_cost).sum();
    let total_consumer_cost = regions.iter().map(|r| r.consumer_cost).sum();
    let total_demand_mwh: f64 = regions.iter().map(|r| r.demand_mwh).sum();
    let total_lcoe = if total_demand_mwh > 0.0 {
        total_system_cost / total_demand_mwh
    } else {
        0.0
    };
    Ok(CostReport {
        regions,
        links,
        total_system_cost,
        total_consumer_cost,
        total_demand_mwh,
        total_lcoe,
        conventional_share: system_summary(inputs, formulated, solution).conventional_share,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarrierTotals {
    pub name: String,
    /// Installed (or fixed) power capacity, MW.
    pub capacity_mw: f64,
    /// Generation or storage discharge, MWh/a.
    pub generation_mwh: f64,
    /// Storage charging, MWh/a.
    pub charge_mwh: f64,
    /// Energy capacity of storage, MWh.
    pub energy_capacity_mwh: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSummary {
    pub carriers: Vec<CarrierTotals>,
    pub demand_mwh: f64,
    pub spill_mwh: f64,
    /// `(coal + gas) / (generator output + reservoir dispatch)`.
    pub conventional_share: f64,
    /// Battery charge plus discharge, MWh/a.
    pub storage_exchange_mwh: f64,
    /// Generation-side emissions, tCO2/a.
    pub co2_total: f64,
    pub objective: f64,
}

impl SystemSummary {
    pub fn carrier(&self, name: &str) -> Option<&CarrierTotals> {
        self.carriers.iter().find(|c| c.name == name)
    }
}

/// System-wide capacity, generation and emission totals.
pub fn system_summary(
    inputs: &ScenarioInputs,
    formulated: &FormulatedLp,
    solution: &Solution,
) -> SystemSummary {
    let net = &*inputs.network;
    let idx = &formulated.index;
    let x = &solution.primal;
    let w = formulated.snapshot_weight;
    let mut carriers = Vec::with_capacity(net.carriers.len());
    let (mut conventional, mut primary, mut exchange, mut co2, mut spill) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (s, c) in net.carriers.iter().enumerate() {
        let mut t = CarrierTotals {
            name: c.name.clone(),
            capacity_mw: 0.0,
            generation_mwh: 0.0,
            charge_mwh: 0.0,
            energy_capacity_mwh: 0.0,
        };
        for n in 0..net.regions.len() {
            match idx.cap[n][s] {
                Some(j) => {
                    t.capacity_mw += x[j];
                    if c.is_storage() {
                        t.energy_capacity_mwh += x[j] * inputs.battery_hours(c);
                    }
                }
                None if c.is_reservoir() && inputs.has_reservoir(n) => {
                    t.capacity_mw += inputs.series.hydro_power_capacity[n];
                    t.energy_capacity_mwh += inputs.series.hydro_energy_capacity[n];
                }
                None => {}
            }
            t.generation_mwh += (energy(&idx.gen[n][s], x) + energy(&idx.dispatch[n][s], x)) * w;
            t.charge_mwh += energy(&idx.store[n][s], x) * w;
            spill += energy(&idx.spill[n][s], x) * w;
        }
        if c.is_conventional() {
            conventional += t.generation_mwh;
        }
        if c.is_generator() || c.is_reservoir() {
            primary += t.generation_mwh;
        }
        if c.is_battery_like() {
            exchange += t.generation_mwh + t.charge_mwh;
        }
        co2 += t.generation_mwh * c.emission_factor;
        carriers.push(t);
    }
    let demand_mwh = inputs
        .series
        .demand
        .iter()
        .map(|d| d.iter().sum::<f64>() * w)
        .sum();
    SystemSummary {
        carriers,
        demand_mwh,
        spill_mwh: spill,
        conventional_share: if primary > 0.0 {
            (conventional / primary).clamp(0.0, 1.0)
        } else {
            0.0
        },
        storage_exchange_mwh: exchange,
        co2_total: co2,
        objective: solution.objective,
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// Writes `report.csv`: one row per region.
pub fn write_report_csv<W: Write>(
    report: &CostReport,
    network: &Network,
    out: W,
) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "region",
        "system_cost",
        "capital_cost",
        "operating_cost",
        "carbon_payment",
        "consumer_cost",
        "consumer_lcoe",
        "resource_rent",
        "net_profit",
        "demand_mwh",
        "net_import_mwh",
        "co2_net_import_t",
    ])?;
    for (r, region) in report.regions.iter().zip(&network.regions) {
        w.write_record([
            region.short_code.clone(),
            num(r.system_cost),
            num(r.capital_cost),
            num(r.operating_cost),
            num(r.carbon_payment),
            num(r.consumer_cost),
            num(r.consumer_lcoe),
            num(r.resource_rent),
            num(r.net_profit),
            num(r.demand_mwh),
            num(r.net_import_mwh),
            r.co2_net_import.map_or(String::new(), num),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `links.csv`: one row per link.
pub fn write_links_csv<W: Write>(
    report: &CostReport,
    network: &Network,
    out: W,
) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["link", "capacity_mw", "congestion_rent", "energy_mwh", "congested_fraction"])?;
    for (l, c) in report.links.iter().enumerate() {
        w.write_record([
            network.link_name(l),
            num(network.links[l].capacity),
            num(c.congestion_rent),
            num(c.energy_mwh),
            num(c.congested_fraction),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `summary.csv`: a header and one scenario row.
pub fn write_summary_csv<W: Write>(
    summary: &SystemSummary,
    report: &CostReport,
    out: W,
) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "objective".to_owned(),
        "total_lcoe".into(),
        "conventional_share".into(),
        "co2_total_t".into(),
        "storage_exchange_mwh".into(),
        "closure_residual".into(),
    ];
    let mut row = vec![
        num(summary.objective),
        num(report.total_lcoe),
        num(summary.conventional_share),
        num(summary.co2_total),
        num(summary.storage_exchange_mwh),
        num(report.closure_residual()),
    ];
    for c in &summary.carriers {
        header.push(format!("cap_{}_mw", c.name));
        header.push(format!("gen_{}_mwh", c.name));
        row.push(num(c.capacity_mw));
        row.push(num(c.generation_mwh));
    }
    w.write_record(&header)?;
    w.write_record(&row)?;
    w.flush()?;
    Ok(())
}
