//! Flow tracing by Average Participation and CO2 attribution.
//!
//! Each node first serves its own consumption from its own production. Only
//! the net injection `max(0, P - C)` enters the network, and the remainder of
//! a net importer's consumption is traced upstream with proportional sharing:
//! every MW leaving a node (to its load or onto a link) carries the same mix
//! as the node's throughput.
use crate::formulation::{FormulatedLp, ScenarioInputs};
use crate::model::Network;
use crate::solver::{Solution, SolveStatus};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TracingError {
    #[error("solution is not optimal")]
    NotOptimal,
    #[error("snapshot {t}: balance at node {node} is off by {residual:.3e} MW")]
    Imbalance { t: usize, node: usize, residual: f64 },
    #[error("snapshot {t}: injection matrix is singular")]
    Singular { t: usize },
    #[error("snapshot {t}: negative allocation {value:.3e} from node {producer} to node {consumer}")]
    NegativeAllocation {
        t: usize,
        producer: usize,
        consumer: usize,
        value: f64,
    },
    #[error("snapshot {t}: {reason}")]
    Malformed { t: usize, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Realised operation at one step, in MW.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSnapshot {
    pub t: usize,
    /// Production per node and carrier: generation or storage discharge.
    pub production: Vec<Vec<f64>>,
    /// Gross production per node, `p+`.
    pub injection: Vec<f64>,
    /// Gross consumption per node (load plus storage charging), `p-`.
    pub withdrawal: Vec<f64>,
    /// `(from, to)` of each link; positive flow runs from `from` to `to`.
    pub link_ends: Vec<(usize, usize)>,
    pub flows: Vec<f64>,
}

impl FlowSnapshot {
    /// Builds a snapshot from production and consumption, checking
    /// `p+ - p- = net export` at every node within `1e-6` relative.
    pub fn new(
        t: usize,
        production: Vec<Vec<f64>>,
        withdrawal: Vec<f64>,
        link_ends: Vec<(usize, usize)>,
        flows: Vec<f64>,
    ) -> Result<Self, TracingError> {
        let n = production.len();
        if withdrawal.len() != n || link_ends.len() != flows.len() {
            return Err(TracingError::Malformed {
                t,
                reason: "inconsistent dimensions".into(),
            });
        }
        if let Some(&(a, b)) = link_ends.iter().find(|(a, b)| *a >= n || *b >= n || a == b) {
            return Err(TracingError::Malformed {
                t,
                reason: format!("link ({a}, {b}) is invalid for {n} nodes"),
            });
        }
        let injection: Vec<f64> = production.iter().map(|p| p.iter().sum()).collect();
        let snap = FlowSnapshot {
            t,
            production,
            injection,
            withdrawal,
            link_ends,
            flows,
        };
        let export = snap.net_export();
        for node in 0..n {
            let residual = snap.injection[node] - snap.withdrawal[node] - export[node];
            let scale = 1.0 + snap.injection[node].max(snap.withdrawal[node]);
            if residual.abs() > 1e-6 * scale {
                return Err(TracingError::Imbalance { t, node, residual });
            }
        }
        Ok(snap)
    }

    pub fn num_nodes(&self) -> usize {
        self.injection.len()
    }

    /// `sum_l K_nl f_l` per node.
    pub fn net_export(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.num_nodes()];
        for (&(a, b), &f) in self.link_ends.iter().zip(&self.flows) {
            e[a] += f;
            e[b] -= f;
        }
        e
    }
}

/// Extracts the snapshot at step `t` from an optimal solution.
pub fn snapshot_from_solution(
    inputs: &ScenarioInputs,
    formulated: &FormulatedLp,
    solution: &Solution,
    t: usize,
) -> Result<FlowSnapshot, TracingError> {
    if solution.status != SolveStatus::Optimal {
        return Err(TracingError::NotOptimal);
    }
    let net = &*inputs.network;
    let idx = &formulated.index;
    let x = &solution.primal;
    let at = |cols: &Option<Vec<usize>>| cols.as_ref().map_or(0.0, |c| x[c[t]].max(0.0));
    let mut production = Vec::with_capacity(net.regions.len());
    let mut withdrawal = Vec::with_capacity(net.regions.len());
    for n in 0..net.regions.len() {
        let mut p = vec![0.0; net.carriers.len()];
        let mut charge = 0.0;
        for (s, ps) in p.iter_mut().enumerate() {
            *ps = at(&idx.gen[n][s]) + at(&idx.dispatch[n][s]);
            charge += at(&idx.store[n][s]);
        }
        production.push(p);
        withdrawal.push(inputs.series.demand[n][t] + charge);
    }
    let link_ends = net.links.iter().map(|l| (l.from_region, l.to_region)).collect();
    let flows = idx.flow.iter().map(|cols| x[cols[t]]).collect();
    FlowSnapshot::new(t, production, withdrawal, link_ends, flows)
}

/// Allocation of one snapshot, in MW.
#[derive(Debug, Clone, PartialEq)]
pub struct StepAllocation {
    pub t: usize,
    /// Production consumed where it is produced, `min(P, C)`.
    pub self_supply: Vec<f64>,
    /// Net injection `max(0, export)`.
    pub net_injection: Vec<f64>,
    /// Net withdrawal `max(0, -export)`.
    pub net_withdrawal: Vec<f64>,
    /// `mix[k][m]`: share of node `k`'s throughput injected at node `m`.
    /// Rows of nodes without throughput are zero.
    pub mix: Vec<Vec<f64>>,
    /// `peer_to_peer[m][n][s]`: power produced by carrier `s` at `m` and
    /// consumed at `n`, self-supply included.
    pub peer_to_peer: Vec<Vec<Vec<f64>>>,
}

impl StepAllocation {
    /// Power from `source` to `sink` summed over carriers.
    pub fn between(&self, source: usize, sink: usize) -> f64 {
        self.peer_to_peer[source][sink].iter().sum()
    }

    /// Carrier composition (MW per carrier) of the flow on each link.
    pub fn link_carriers(&self, snapshot: &FlowSnapshot) -> Vec<Vec<f64>> {
        let ns = snapshot.production.first().map_or(0, Vec::len);
        let shares = carrier_shares(snapshot);
        snapshot
            .link_ends
            .iter()
            .zip(&snapshot.flows)
            .map(|(&(a, b), &f)| {
                let upstream = if f >= 0.0 { a } else { b };
                let mut out = vec![0.0; ns];
                for (m, phi) in self.mix[upstream].iter().enumerate() {
                    for (o, share) in out.iter_mut().zip(&shares[m]) {
                        *o += f.abs() * phi * share;
                    }
                }
                out
            })
            .collect()
    }
}

fn carrier_shares(snapshot: &FlowSnapshot) -> Vec<Vec<f64>> {
    snapshot
        .production
        .iter()
        .zip(&snapshot.injection)
        .map(|(p, &total)| {
            if total > 0.0 {
                p.iter().map(|v| v / total).collect()
            } else {
                vec![0.0; p.len()]
            }
        })
        .collect()
}

/// Average Participation for one snapshot.
pub fn average_participation(snapshot: &FlowSnapshot) -> Result<StepAllocation, TracingError> {
    let t = snapshot.t;
    let nn = snapshot.num_nodes();
    let export = snapshot.net_export();
    let net_injection: Vec<f64> = export.iter().map(|e| e.max(0.0)).collect();
    let net_withdrawal: Vec<f64> = export.iter().map(|e| (-e).max(0.0)).collect();
    let self_supply: Vec<f64> = snapshot
        .injection
        .iter()
        .zip(&net_injection)
        .map(|(p, e)| (p - e).max(0.0))
        .collect();

    // Throughput: net injection plus inflow, equal to net withdrawal plus outflow.
    let mut throughput = net_injection.clone();
    let mut directed: Vec<(usize, usize, f64)> = Vec::new();
    for (&(a, b), &f) in snapshot.link_ends.iter().zip(&snapshot.flows) {
        if f > 0.0 {
            directed.push((a, b, f));
            throughput[b] += f;
        } else if f < 0.0 {
            directed.push((b, a, -f));
            throughput[a] += -f;
        }
    }
    let active: Vec<usize> = (0..nn).filter(|&n| throughput[n] > 0.0).collect();
    let mut pos = vec![usize::MAX; nn];
    for (k, &n) in active.iter().enumerate() {
        pos[n] = k;
    }
    let size = active.len();
    let mut mix = vec![vec![0.0; nn]; nn];
    if size > 0 {
        // M = diag(throughput) - F_in with F_in[n][m] = flow from m into n.
        let mut m = DMatrix::<f64>::zeros(size, size);
        for (k, &n) in active.iter().enumerate() {
            m[(k, k)] = throughput[n];
        }
        for &(from, to, f) in &directed {
            m[(pos[to], pos[from])] -= f;
        }
        let lu = m.lu();
        for (k, &source) in active.iter().enumerate() {
            if net_injection[source] <= 0.0 {
                continue;
            }
            let mut rhs = DVector::<f64>::zeros(size);
            rhs[k] = net_injection[source];
            let col = lu.solve(&rhs).ok_or(TracingError::Singular { t })?;
            if col.iter().any(|v| !v.is_finite()) {
                return Err(TracingError::Singular { t });
            }
            for (r, &node) in active.iter().enumerate() {
                mix[node][source] = col[r];
            }
        }
    }

    let shares = carrier_shares(snapshot);
    let ns = snapshot.production.first().map_or(0, Vec::len);
    let mut peer_to_peer = vec![vec![vec![0.0; ns]; nn]; nn];
    for source in 0..nn {
        for sink in 0..nn {
            let mut power = mix[sink][source] * net_withdrawal[sink];
            if power < 0.0 {
                if power < -1e-9 * (1.0 + net_withdrawal[sink]) {
                    return Err(TracingError::NegativeAllocation {
                        t,
                        producer: source,
                        consumer: sink,
                        value: power,
                    });
                }
                power = 0.0;
            }
            if source == sink {
                power += self_supply[sink];
            }
            for (a, share) in peer_to_peer[source][sink].iter_mut().zip(&shares[source]) {
                *a = power * share;
            }
        }
    }
    Ok(StepAllocation {
        t,
        self_supply,
        net_injection,
        net_withdrawal,
        mix,
        peer_to_peer,
    })
}

/// CO2 accounts of a solved scenario over all steps.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    /// Hours of the year represented by one step.
    pub weight: f64,
    pub steps: Vec<StepAllocation>,
    /// Emissions embodied in each node's consumption, tCO2/a.
    pub co2_by_sink: Vec<f64>,
    /// Emissions produced at each node, tCO2/a.
    pub co2_by_source: Vec<f64>,
    /// `co2_by_link[l][s]`: emissions carried by link `l` from carrier `s`, tCO2/a.
    pub co2_by_link: Vec<Vec<f64>>,
    /// `sum g e w` over all generation, tCO2/a.
    pub co2_total: f64,
}

impl AllocationResult {
    /// Consumed minus produced emissions per node.
    pub fn co2_net_import(&self) -> Vec<f64> {
        self.co2_by_sink
            .iter()
            .zip(&self.co2_by_source)
            .map(|(s, p)| s - p)
            .collect()
    }

    /// Energy (MWh/a) from `source` to `sink` by carrier.
    pub fn energy(&self, source: usize, sink: usize) -> Vec<f64> {
        let ns = self.steps.first().map_or(0, |s| s.peer_to_peer[0][0].len());
        let mut out = vec![0.0; ns];
        for step in &self.steps {
            for (o, v) in out.iter_mut().zip(&step.peer_to_peer[source][sink]) {
                *o += v * self.weight;
            }
        }
        out
    }
}

/// Traces every step of `solution` and attributes emissions.
pub fn allocate_co2(
    inputs: &ScenarioInputs,
    formulated: &FormulatedLp,
    solution: &Solution,
) -> Result<AllocationResult, TracingError> {
    if solution.status != SolveStatus::Optimal {
        return Err(TracingError::NotOptimal);
    }
    let net = &*inputs.network;
    let factors: Vec<f64> = net.carriers.iter().map(|c| c.emission_factor).collect();
    let per_step: Vec<(StepAllocation, Vec<Vec<f64>>)> = (0..inputs.steps())
        .into_par_iter()
        .map(|t| {
            let snap = snapshot_from_solution(inputs, formulated, solution, t)?;
            let alloc = average_participation(&snap)?;
            let links = alloc.link_carriers(&snap);
            Ok((alloc, links))
        })
        .collect::<Result<_, TracingError>>()?;
    Ok(accumulate(net, &factors, formulated.snapshot_weight, per_step))
}

/// Sums per-step allocations in step order.
fn accumulate(
    net: &Network,
    factors: &[f64],
    weight: f64,
    per_step: Vec<(StepAllocation, Vec<Vec<f64>>)>,
) -> AllocationResult {
    let nn = net.regions.len();
    let ns = factors.len();
    let mut co2_by_sink = vec![0.0; nn];
    let mut co2_by_source = vec![0.0; nn];
    let mut co2_by_link = vec![vec![0.0; ns]; net.links.len()];
    let mut steps = Vec::with_capacity(per_step.len());
    for (alloc, links) in per_step {
        for m in 0..nn {
            for n in 0..nn {
                for (s, e) in factors.iter().enumerate() {
                    let c = alloc.peer_to_peer[m][n][s] * e * weight;
                    co2_by_sink[n] += c;
                    co2_by_source[m] += c;
                }
            }
        }
        for (acc, flow) in co2_by_link.iter_mut().zip(&links) {
            for (s, e) in factors.iter().enumerate() {
                acc[s] += flow[s] * e * weight;
            }
        }
        steps.push(alloc);
    }
    let co2_total = co2_by_source.iter().sum();
    AllocationResult {
        weight,
        steps,
        co2_by_sink,
        co2_by_source,
        co2_by_link,
        co2_total,
    }
}

/// Generation-side emissions `sum g e w` straight from the solution, tCO2/a.
pub fn generation_co2(inputs: &ScenarioInputs, formulated: &FormulatedLp, solution: &Solution) -> f64 {
    let net = &*inputs.network;
    let mut total = 0.0;
    for n in 0..net.regions.len() {
        for (s, c) in net.carriers.iter().enumerate() {
            if c.emission_factor == 0.0 {
                continue;
            }
            for cols in [&formulated.index.gen[n][s], &formulated.index.dispatch[n][s]]
                .into_iter()
                .flatten()
            {
                let energy: f64 = cols.iter().map(|&j| solution.primal[j].max(0.0)).sum();
                total += energy * c.emission_factor * formulated.snapshot_weight;
            }
        }
    }
    total
}

/// Writes `t,source,sink,carrier,mwh`, skipping zero entries.
pub fn write_allocation_csv<W: Write>(
    result: &AllocationResult,
    network: &Network,
    out: W,
) -> Result<(), TracingError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "source", "sink", "carrier", "mwh"])?;
    for step in &result.steps {
        for (m, row) in step.peer_to_peer.iter().enumerate() {
            for (n, carriers) in row.iter().enumerate() {
                for (s, &v) in carriers.iter().enumerate() {
                    if v > 0.0 {
                        w.write_record([
                            step.t.to_string(),
                            network.regions[m].short_code.clone(),
                            network.regions[n].short_code.clone(),
                            network.carriers[s].name.clone(),
                            format!("{}", v * result.weight),
                        ])?;
                    }
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `region,tco2_consumed,tco2_produced,tco2_net_import`.
pub fn write_co2_by_sink_csv<W: Write>(
    result: &AllocationResult,
    network: &Network,
    out: W,
) -> Result<(), TracingError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["region", "tco2_consumed", "tco2_produced", "tco2_net_import"])?;
    let net_import = result.co2_net_import();
    for (n, r) in network.regions.iter().enumerate() {
        w.write_record([
            r.short_code.clone(),
            format!("{}", result.co2_by_sink[n]),
            format!("{}", result.co2_by_source[n]),
            format!("{}", net_import[n]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `link,<carrier>...,total` in tCO2/a.
pub fn write_co2_by_link_csv<W: Write>(
    result: &AllocationResult,
    network: &Network,
    out: W,
) -> Result<(), TracingError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["link".to_owned()];
    header.extend(network.carriers.iter().map(|c| c.name.clone()));
    header.push("total".into());
    w.write_record(&header)?;
    for (l, per_carrier) in result.co2_by_link.iter().enumerate() {
        let mut rec = vec![network.link_name(l)];
        rec.extend(per_carrier.iter().map(|v| format!("{v}")));
        rec.push(format!("{}", per_carrier.iter().sum::<f64>()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
