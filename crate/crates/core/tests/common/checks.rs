//! Checks shared by the focused tests and the acceptance run. Each returns
//! the list of violations it found.
use super::tables::{CARRIERS, DEMAND_TENTHS, LINKS, REGIONS};
use super::{enumerable_toy, exact_simplex, one_sided, q, rel, to_f64, vertex_enumeration, DagSnapshot, Q, BUDGET};
use leakage::formulation::build_lp;
use leakage::lp::LinearProgram;
use leakage::model::{default_network, Region};
use leakage::solver::{parse_mps, solve, write_mps, Tolerances};
use leakage::sweep::{render_charts, run_sweep, ScenarioSpec, SeriesSpec, SweepConfig};
use std::fs;
use std::path::{Path, PathBuf};
use leakage::pricing::{clipping_threshold_alpha, demand_weighted_gdp, effective_price, PricingScheme};
use leakage::tracing::{average_participation, FlowSnapshot};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_fidelity() -> Vec<String> {
    let net = default_network();
    let mut bad = Vec::new();
    if net.regions.len() != REGIONS.len() {
        bad.push(format!("{} regions", net.regions.len()));
    }
    for (r, (code, gdp, pop, demand)) in net.regions.iter().zip(REGIONS) {
        if r.short_code != code || r.gdp_per_capita != gdp as f64 || r.population != ((pop * 10.0).round() * 1e5) || r.mean_demand != demand {
            bad.push(format!("region {code}: {r:?}"));
        }
    }
    if net.links.len() != LINKS.len() {
        bad.push(format!("{} links", net.links.len()));
    }
    for (l, (a, b, cap)) in net.links.iter().zip(LINKS) {
        let ends = (&net.regions[l.from_region].short_code, &net.regions[l.to_region].short_code);
        if ends != (&a.to_owned(), &b.to_owned()) || l.capacity != cap {
            bad.push(format!("link {a}-{b}: {l:?}"));
        }
    }
    let total: f64 = LINKS.iter().map(|l| l.2).sum();
    if net.total_link_capacity() != total || total != 91_608.0 {
        bad.push(format!("link capacity sum {} vs {total}", net.total_link_capacity()));
    }
    if net.carriers.len() != CARRIERS.len() {
        bad.push(format!("{} carriers", net.carriers.len()));
    }
    for (c, (name, capital, marginal, emission)) in net.carriers.iter().zip(CARRIERS) {
        if c.name != name || c.capital_cost != capital || c.marginal_cost != marginal || c.emission_factor != emission {
            bad.push(format!("carrier {name}: {c:?}"));
        }
    }
    bad
}

/// Exact demand-weighted GDP of the region table.
pub fn reference_gdp_exact() -> Q {
    let num = REGIONS
        .iter()
        .zip(DEMAND_TENTHS)
        .fold(Q::zero(), |acc, (r, d)| acc + q(r.1) * q(d));
    num / q(DEMAND_TENTHS.iter().sum())
}

/// Exact clipping threshold of the region table.
pub fn clipping_threshold_exact() -> Q {
    let gdp_min = REGIONS.iter().map(|r| r.1).min().unwrap();
    q(1) / (q(1) - q(gdp_min) / reference_gdp_exact())
}

pub fn gdp_and_threshold() -> Vec<String> {
    let net = default_network();
    let mut bad = Vec::new();
    let oracle = to_f64(&reference_gdp_exact());
    let got = demand_weighted_gdp(&net.regions).unwrap();
    if (got - oracle).abs() > 1e-9 * oracle {
        bad.push(format!("reference GDP {got} vs {oracle}"));
    }
    let oracle = to_f64(&clipping_threshold_exact());
    let got = clipping_threshold_alpha(&net.regions).unwrap().value().unwrap_or(f64::NAN);
    if !((got - oracle).abs() <= 1e-9 * oracle) {
        bad.push(format!("clipping threshold {got} vs {oracle}"));
    }
    // leakage onset observed at alpha = 1.6 lies above the threshold
    if !(oracle < 1.6 && (oracle - 1.47).abs() < 0.01) {
        bad.push(format!("clipping threshold {oracle} is not about 1.47"));
    }
    bad
}

fn random_regions(rng: &mut ChaCha8Rng) -> Vec<Region> {
    let n = rng.random_range(2..=11);
    (0..n)
        .map(|i| Region {
            id: i,
            name: format!("r{i}"),
            short_code: format!("R{i}"),
            gdp_per_capita: rng.random_range(5_000.0..90_000.0),
            population: 1.0,
            mean_demand: rng.random_range(1.0..80.0),
        })
        .collect()
}

/// The three pricing invariants over `samples` random (mu, alpha, gdp) draws.
pub fn pricing_invariants(samples: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    let table = default_network().regions;
    for k in 0..samples {
        let regions = if k % 10 == 0 { table.clone() } else { random_regions(&mut rng) };
        let mu = if k % 7 == 0 { 0.0 } else { rng.random_range(0.0..400.0) };
        let alpha = rng.random_range(0.0..3.0);
        let scheme = PricingScheme::for_regions(&regions, mu, alpha).unwrap();
        if let Some(p) = scheme.effective_price.iter().find(|p| !(**p >= 0.0)) {
            bad.push(format!("sample {k}: negative price {p}"));
        }
        let mean = scheme.weighted_mean_price(&regions);
        let threshold = clipping_threshold_alpha(&regions).unwrap().value().unwrap_or(f64::INFINITY);
        if alpha <= threshold {
            if (mean - mu).abs() > 1e-9 * mu.max(1.0) {
                bad.push(format!("sample {k}: mean {mean} != base {mu} at alpha {alpha} <= {threshold}"));
            }
        } else if mean < mu * (1.0 - 1e-12) {
            bad.push(format!("sample {k}: mean {mean} < base {mu} at alpha {alpha} > {threshold}"));
        }
        // monotonicity in gdp and in the base price
        let reference = scheme.reference_gdp;
        let g = rng.random_range(1_000.0..100_000.0);
        let dg = rng.random_range(0.0..20_000.0);
        let dmu = rng.random_range(0.0..100.0);
        let p = effective_price(g, mu, alpha, reference);
        if effective_price(g + dg, mu, alpha, reference) < p {
            bad.push(format!("sample {k}: price decreases in gdp"));
        }
        if effective_price(g, mu + dmu, alpha, reference) < p {
            bad.push(format!("sample {k}: price decreases in base price"));
        }
        if bad.len() > 20 {
            break;
        }
    }
    bad
}

/// Builds the library snapshot of an integer DAG snapshot.
pub fn flow_snapshot(s: &DagSnapshot) -> FlowSnapshot {
    FlowSnapshot::new(
        0,
        s.production.iter().map(|p| p.iter().map(|&v| v as f64).collect()).collect(),
        s.withdrawal.iter().map(|&v| v as f64).collect(),
        s.link_ends.clone(),
        s.flows.iter().map(|&v| v as f64).collect(),
    )
    .expect("balanced snapshot")
}

/// Average participation against exact proportional sharing on `count`
/// random acyclic snapshots; returns the violations and the largest error.
pub fn tracing_against_dag_oracle(count: usize, seed: u64) -> (Vec<String>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for k in 0..count {
        let nodes = rng.random_range(2..=5);
        let carriers = rng.random_range(1..=3);
        let dag = DagSnapshot::random(&mut rng, nodes, carriers);
        let oracle = dag.proportional_sharing();
        let step = match average_participation(&flow_snapshot(&dag)) {
            Ok(s) => s,
            Err(e) => {
                bad.push(format!("snapshot {k}: {e}"));
                continue;
            }
        };
        for src in 0..nodes {
            let p_src: i64 = dag.production[src].iter().sum();
            for sink in 0..nodes {
                let want = to_f64(&oracle[src][sink]);
                let err = (step.between(src, sink) - want).abs() / want.abs().max(1.0);
                worst = worst.max(err);
                if err > 1e-9 {
                    bad.push(format!("snapshot {k}: {src}->{sink} {} vs {want}", step.between(src, sink)));
                }
                // carrier split follows the source's production mix
                for (s, &p) in dag.production[src].iter().enumerate() {
                    if p_src == 0 {
                        continue;
                    }
                    let want = to_f64(&(&oracle[src][sink] * q(p) / q(p_src)));
                    let got = step.peer_to_peer[src][sink][s];
                    let err = (got - want).abs() / want.abs().max(1.0);
                    worst = worst.max(err);
                    if err > 1e-9 {
                        bad.push(format!("snapshot {k}: {src}->{sink} carrier {s} {got} vs {want}"));
                    }
                }
            }
        }
    }
    (bad, worst)
}

fn small_config(out: &Path, threads: usize) -> SweepConfig {
    SweepConfig {
        mu_values: Some(vec![0.0, 80.0, 400.0]),
        alpha_values: Some(vec![0.0, 2.0]),
        series: SeriesSpec {
            hours: 48,
            blocks: 2,
            ..SeriesSpec::default()
        },
        output: out.to_owned(),
        threads,
        ..SweepConfig::default()
    }
}

fn same_coefficients(a: &LinearProgram, b: &LinearProgram) -> bool {
    a.columns() == b.columns()
        && a.rows() == b.rows()
        && (0..a.num_rows()).all(|i| {
            let mut x = a.row_entries(i).to_vec();
            let mut y = b.row_entries(i).to_vec();
            x.sort_by_key(|e| e.0);
            y.sort_by_key(|e| e.0);
            x == y
        })
}

/// Rerun idempotence, thread independence, MPS round trip and chart
/// determinism on a small sweep written below `dir`.
pub fn reproducibility(dir: &Path) -> Vec<String> {
    let mut bad = Vec::new();
    let serial = small_config(&dir.join("serial"), 1);
    let first = run_sweep(&serial, false).unwrap();
    let summary = fs::read(&first.summary).unwrap();
    let again = run_sweep(&serial, false).unwrap();
    if again.solved != 0 || again.skipped != 6 {
        bad.push(format!("rerun solved {} and skipped {}", again.solved, again.skipped));
    }
    if fs::read(&again.summary).unwrap() != summary {
        bad.push("rerun changed summary.csv".into());
    }
    let parallel = small_config(&dir.join("parallel"), 4);
    let par = run_sweep(&parallel, false).unwrap();
    if fs::read(&par.summary).unwrap() != summary {
        bad.push("summary.csv depends on the thread count".into());
    }
    if first.failed != 0 {
        bad.push(format!("{} small-sweep points failed", first.failed));
    }

    let spec = ScenarioSpec::new(80.0, 2.0, serial.series.clone());
    let lp = build_lp(&spec.inputs().unwrap()).unwrap().lp;
    let mut text = Vec::new();
    write_mps(&lp, &mut text).unwrap();
    let back = parse_mps(text.as_slice()).unwrap();
    if !same_coefficients(&back, &lp) {
        bad.push("MPS round trip changed coefficients".into());
    }
    let mut text2 = Vec::new();
    write_mps(&back, &mut text2).unwrap();
    if text2 != text {
        bad.push("MPS re-export is not byte-identical".into());
    }

    let render = |store: &Path| -> Vec<(PathBuf, Vec<u8>)> {
        render_charts(store)
            .unwrap()
            .into_iter()
            .map(|p| {
                let bytes = fs::read(&p).unwrap();
                (p, bytes)
            })
            .collect()
    };
    let a = render(&serial.output);
    let b = render(&serial.output);
    if a != b || a.is_empty() {
        bad.push("charts differ between renderings".into());
    }
    bad
}

/// Interior-point optima of `count` random toy scenarios against vertex
/// enumeration and the exact simplex; returns violations and the worst error.
pub fn toys_against_vertex_enumeration(count: usize, seed: u64) -> (Vec<String>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = Tolerances::default();
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for k in 0..count {
        let toy = enumerable_toy(&mut rng);
        let lp = build_lp(&toy.inputs()).unwrap().lp;
        let Some(oracle) = vertex_enumeration(&lp, BUDGET).unwrap() else {
            bad.push(format!("toy {k}: no feasible vertex"));
            continue;
        };
        match solve(&lp, &tol) {
            Ok(sol) => {
                let err = rel(sol.objective, oracle);
                worst = worst.max(err);
                if err > 1e-6 {
                    bad.push(format!("toy {k} {:?}: {} vs {oracle}", toy.carriers, sol.objective));
                }
            }
            Err(e) => bad.push(format!("toy {k}: {e}")),
        }
        let exact = exact_simplex(&lp).value().unwrap_or(f64::NAN);
        if !(rel(exact, oracle) <= 1e-9) {
            bad.push(format!("toy {k}: exact simplex {exact} vs vertices {oracle}"));
        }
    }
    (bad, worst)
}

/// Balance duals of `count` toys against exact one-sided derivatives of the
/// optimum; returns violations and the number of non-degenerate rows seen.
pub fn duals_against_finite_differences(count: usize, seed: u64) -> (Vec<String>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = Tolerances::default();
    let mut bad = Vec::new();
    let mut strict = 0;
    for k in 0..count {
        let toy = super::Toy::random(&mut rng, 1 + k % 2, &["wind", "gas", "coal"][..2 + k % 2], 2);
        let f = build_lp(&toy.inputs()).unwrap();
        let sol = solve(&f.lp, &tol).unwrap();
        let duals = sol.dual.as_ref().unwrap();
        for rows in &f.index.balance {
            for &r in rows {
                let (left, right) = one_sided(&f.lp, r);
                let y = duals[r];
                let slack = 1e-4 * left.abs().max(right.abs()).max(1.0);
                if !(left - slack <= y && y <= right + slack) {
                    bad.push(format!("toy {k} row {}: dual {y} outside [{left}, {right}]", f.lp.rows()[r].name));
                }
                if rel(left, right) < 1e-12 {
                    strict += 1;
                    if rel(y, left) >= 1e-4 {
                        bad.push(format!("toy {k} row {}: dual {y} vs derivative {left}", f.lp.rows()[r].name));
                    }
                }
            }
        }
    }
    (bad, strict)
}
