//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod checks;
pub mod tables;

use chrono::NaiveDate;
use leakage::formulation::{FormulationOptions, ScenarioInputs};
use leakage::lp::{LinearProgram, Sense};
use leakage::model::{default_network, Link, Network, TimeSeriesSet};
use leakage::pricing::PricingScheme;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use leakage::formulation::build_lp;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::sync::Arc;

pub type Q = BigRational;

pub fn q(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// Simplest rational within a relative 1e-13 of `v` (so 0.9 becomes 9/10).
pub fn rat(v: f64) -> Q {
    assert!(v.is_finite(), "cannot convert {v}");
    if v == v.trunc() && v.abs() < 1e15 {
        return q(v as i64);
    }
    let target = v.abs();
    let tol = 1e-13 * target.max(1.0);
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut x = target;
    for _ in 0..60 {
        let a = x.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i128;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > 1_000_000_000_000 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (h1 as f64 / k1 as f64 - target).abs() <= tol {
            let r = Q::new(BigInt::from(h1), BigInt::from(k1));
            return if v < 0.0 { -r } else { r };
        }
        let frac = x - x.floor();
        if frac == 0.0 {
            break;
        }
        x = 1.0 / frac;
    }
    Q::from_float(v).expect("finite")
}

pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Exact {
    Optimal(Q),
    Infeasible,
    Unbounded,
}

impl Exact {
    pub fn value(&self) -> Option<f64> {
        match self {
            Exact::Optimal(v) => Some(to_f64(v)),
            _ => None,
        }
    }
}

/// Dense rational tableau, Bland's rule, two phases.
struct Tableau {
    rows: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, obj: &mut [Q], obj_val: &mut Q) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v /= &p;
            }
        }
        self.rhs[r] /= &p;
        let nz: Vec<usize> = (0..self.rows[r].len()).filter(|&j| !self.rows[r][j].is_zero()).collect();
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for &j in &nz {
                let d = &f * &prow[j];
                self.rows[i][j] -= d;
            }
            self.rhs[i] -= &f * &prhs;
        }
        if !obj[c].is_zero() {
            let f = obj[c].clone();
            for &j in &nz {
                obj[j] -= &f * &prow[j];
            }
            *obj_val -= &f * &prhs;
        }
        self.basis[r] = c;
    }

    /// Minimises `obj` over columns `< allowed`; `obj` holds reduced costs.
    fn optimise(&mut self, obj: &mut [Q], obj_val: &mut Q, allowed: usize) -> bool {
        loop {
            let Some(c) = (0..allowed).find(|&j| obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][c].is_positive() {
                    let ratio = &self.rhs[i] / &self.rows[i][c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = best else { return false };
            self.pivot(r, c, obj, obj_val);
        }
    }
}

/// Exact optimum of `lp` in rational arithmetic.
pub fn exact_simplex(lp: &LinearProgram) -> Exact {
    // x_j = offset_j + sum_k coef * y_k with y >= 0
    let mut offset = Vec::new();
    let mut terms: Vec<Vec<(usize, Q)>> = Vec::new();
    let mut ny = 0;
    let mut upper_rows: Vec<(usize, Q)> = Vec::new();
    for c in lp.columns() {
        let (lo, up) = (c.lower, c.upper);
        if lo.is_finite() {
            offset.push(rat(lo));
            terms.push(vec![(ny, q(1))]);
            if up.is_finite() {
                upper_rows.push((ny, rat(up) - rat(lo)));
            }
            ny += 1;
        } else if up.is_finite() {
            offset.push(rat(up));
            terms.push(vec![(ny, q(-1))]);
            ny += 1;
        } else {
            offset.push(Q::zero());
            terms.push(vec![(ny, q(1)), (ny + 1, q(-1))]);
            ny += 2;
        }
    }
    // rows as (dense coefficients over y, sense, rhs)
    let mut cons: Vec<(Vec<Q>, Sense, Q)> = Vec::new();
    for (i, row) in lp.rows().iter().enumerate() {
        let mut a = vec![Q::zero(); ny];
        let mut b = rat(row.rhs);
        for &(j, v) in lp.row_entries(i) {
            let v = rat(v);
            b -= &v * &offset[j];
            for (k, coef) in &terms[j] {
                a[*k] += &v * coef;
            }
        }
        cons.push((a, row.sense, b));
    }
    for (k, u) in upper_rows {
        let mut a = vec![Q::zero(); ny];
        a[k] = q(1);
        cons.push((a, Sense::Le, u));
    }
    let m = cons.len();
    let slack_of: Vec<Option<usize>> = {
        let mut next = ny;
        cons.iter()
            .map(|(_, s, _)| match s {
                Sense::Eq => None,
                _ => {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect()
    };
    let ns = slack_of.iter().flatten().count();
    let real = ny + ns;
    let width = real + m;
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (i, (a, sense, b)) in cons.into_iter().enumerate() {
        let mut row = a;
        row.resize(width, Q::zero());
        if let Some(s) = slack_of[i] {
            row[s] = if sense == Sense::Le { q(1) } else { q(-1) };
        }
        let mut b = b;
        if b.is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            b = -b;
        }
        row[real + i] = q(1);
        rows.push(row);
        rhs.push(b);
    }
    let mut t = Tableau {
        rows,
        rhs,
        basis: (real..real + m).collect(),
    };

    // phase 1
    let mut obj = vec![Q::zero(); width];
    let mut val = Q::zero();
    for i in 0..m {
        for j in 0..real {
            obj[j] -= &t.rows[i][j];
        }
        val -= &t.rhs[i];
    }
    t.optimise(&mut obj, &mut val, real);
    if !val.is_zero() {
        return Exact::Infeasible;
    }
    // drive artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= real {
            match (0..real).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => {
                    let mut dummy = vec![Q::zero(); width];
                    let mut dv = Q::zero();
                    t.pivot(i, j, &mut dummy, &mut dv);
                }
                None => {
                    t.rows.remove(i);
                    t.rhs.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // phase 2
    let mut cost = vec![Q::zero(); width];
    let mut constant = Q::zero();
    for (j, c) in lp.columns().iter().enumerate() {
        let cj = rat(c.cost);
        constant += &cj * &offset[j];
        for (k, coef) in &terms[j] {
            cost[*k] += &cj * coef;
        }
    }
    let mut obj = cost.clone();
    let mut val = Q::zero();
    for (r, &b) in t.basis.iter().enumerate() {
        if !cost[b].is_zero() {
            let f = cost[b].clone();
            for j in 0..width {
                if !t.rows[r][j].is_zero() {
                    obj[j] -= &f * &t.rows[r][j];
                }
            }
            val -= &f * &t.rhs[r];
        }
    }
    if !t.optimise(&mut obj, &mut val, real) {
        return Exact::Unbounded;
    }
    Exact::Optimal(constant - val)
}

/// Error raised when enumeration would exceed its budget.
#[derive(Debug)]
pub struct TooManyBases(pub f64);

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of candidate bases `vertex_enumeration` would visit.
pub fn enumeration_size(lp: &LinearProgram) -> f64 {
    let (eq, ineq) = constraint_lists(lp);
    let n = lp.num_columns();
    if eq.len() > n {
        return 0.0;
    }
    binomial(ineq.len(), n - eq.len())
}

type Constraint = (Vec<f64>, f64);

fn constraint_lists(lp: &LinearProgram) -> (Vec<Constraint>, Vec<Constraint>) {
    let n = lp.num_columns();
    let mut eq = Vec::new();
    let mut ineq = Vec::new();
    for (i, row) in lp.rows().iter().enumerate() {
        let mut a = vec![0.0; n];
        for &(j, v) in lp.row_entries(i) {
            a[j] = v;
        }
        match row.sense {
            Sense::Eq => eq.push((a, row.rhs)),
            Sense::Le => ineq.push((a, row.rhs)),
            Sense::Ge => ineq.push((a.iter().map(|v| -v).collect(), -row.rhs)),
        }
    }
    for (j, c) in lp.columns().iter().enumerate() {
        let mut e = vec![0.0; n];
        if c.lower == c.upper {
            e[j] = 1.0;
            eq.push((e, c.lower));
            continue;
        }
        if c.lower.is_finite() {
            e[j] = -1.0;
            ineq.push((e.clone(), -c.lower));
        }
        if c.upper.is_finite() {
            e[j] = 1.0;
            ineq.push((e, c.upper));
        }
    }
    (eq, ineq)
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        let scale = a[p].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if a[p][k].abs() <= 1e-10 * scale.max(1e-300) {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

fn satisfied(c: &Constraint, x: &[f64], eq: bool) -> bool {
    let ax: f64 = c.0.iter().zip(x).map(|(a, v)| a * v).sum();
    let mag: f64 = c.0.iter().zip(x).map(|(a, v)| (a * v).abs()).sum::<f64>() + c.1.abs();
    let tol = 1e-9 * (1.0 + mag);
    if eq {
        (ax - c.1).abs() <= tol
    } else {
        ax <= c.1 + tol
    }
}

/// Minimum of `c'x` over every basic feasible solution, by brute force.
/// `Ok(None)` when no vertex is feasible.
pub fn vertex_enumeration(lp: &LinearProgram, budget: f64) -> Result<Option<f64>, TooManyBases> {
    let size = enumeration_size(lp);
    if size > budget {
        return Err(TooManyBases(size));
    }
    let n = lp.num_columns();
    let (eq, ineq) = constraint_lists(lp);
    if eq.len() > n {
        return Ok(None);
    }
    let k = n - eq.len();
    let cost: Vec<f64> = lp.columns().iter().map(|c| c.cost).collect();
    let mut best: Option<f64> = None;
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        if k <= ineq.len() {
            let mut a: Vec<Vec<f64>> = eq.iter().map(|c| c.0.clone()).collect();
            let mut b: Vec<f64> = eq.iter().map(|c| c.1).collect();
            for &p in &pick {
                a.push(ineq[p].0.clone());
                b.push(ineq[p].1);
            }
            if let Some(x) = solve_dense(a, b) {
                if eq.iter().all(|c| satisfied(c, &x, true)) && ineq.iter().all(|c| satisfied(c, &x, false)) {
                    let v: f64 = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
                    best = Some(best.map_or(v, |b: f64| b.min(v)));
                }
            }
        } else {
            break;
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(best);
            }
            i -= 1;
            if pick[i] < ineq.len() - k + i {
                pick[i] += 1;
                for j in i + 1..k {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
    Ok(best)
}

/// Carbon price per region, demand, link capacities and potentials of a toy.
#[derive(Debug, Clone)]
pub struct Toy {
    pub regions: usize,
    pub carriers: Vec<&'static str>,
    pub steps: usize,
    pub demand: Vec<Vec<f64>>,
    pub link_capacity: Vec<f64>,
    pub capacity_factor: BTreeMap<String, Vec<Vec<f64>>>,
    pub prices: Vec<f64>,
}

impl Toy {
    /// Random toy with integer demands and prices and potentials in tenths.
    pub fn random<R: Rng>(rng: &mut R, regions: usize, carriers: &[&'static str], steps: usize) -> Self {
        let demand = (0..regions)
            .map(|_| (0..steps).map(|_| rng.random_range(10..=100) as f64).collect())
            .collect();
        let links = match regions {
            1 => 0,
            2 => 1,
            _ => regions,
        };
        let link_capacity = (0..links).map(|_| rng.random_range(1..=8) as f64 * 10.0).collect();
        let mut capacity_factor = BTreeMap::new();
        for c in carriers {
            if matches!(*c, "wind" | "solar") {
                let table: Vec<Vec<f64>> = (0..regions)
                    .map(|_| (0..steps).map(|_| rng.random_range(0..=10) as f64 / 10.0).collect())
                    .collect();
                capacity_factor.insert((*c).to_owned(), table);
            }
        }
        let prices = (0..regions).map(|_| rng.random_range(0..=150) as f64).collect();
        Toy {
            regions,
            carriers: carriers.to_vec(),
            steps,
            demand,
            link_capacity,
            capacity_factor,
            prices,
        }
    }

    /// Network built from the first regions and the named carriers of the
    /// default network. With `drop_links` the regions are left unconnected.
    pub fn network(&self, drop_links: bool) -> Network {
        let base = default_network();
        let regions = base.regions[..self.regions]
            .iter()
            .enumerate()
            .map(|(i, r)| leakage::model::Region { id: i, ..r.clone() })
            .collect();
        let pairs: Vec<(usize, usize)> = match self.regions {
            1 => vec![],
            2 => vec![(0, 1)],
            n => (0..n).map(|i| (i, (i + 1) % n)).collect(),
        };
        let links: Vec<Link> = pairs
            .iter()
            .zip(&self.link_capacity)
            .map(|(&(a, b), &cap)| Link {
                from_region: a,
                to_region: b,
                capacity: cap,
            })
            .collect();
        let carriers = self
            .carriers
            .iter()
            .map(|c| base.carriers[base.carrier_index(c).expect("known carrier")].clone())
            .collect();
        if drop_links {
            Network {
                regions,
                links: vec![],
                carriers,
            }
        } else {
            Network::new(regions, links, carriers).expect("valid toy network")
        }
    }

    pub fn series(&self) -> TimeSeriesSet {
        let start = NaiveDate::from_ymd_opt(2030, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        TimeSeriesSet {
            timestamps: (0..self.steps).map(|t| start + chrono::Duration::hours(t as i64)).collect(),
            demand: self.demand.clone(),
            capacity_factor: self.capacity_factor.clone(),
            hydro_inflow: vec![vec![0.0; self.steps]; self.regions],
            hydro_energy_capacity: vec![0.0; self.regions],
            hydro_power_capacity: vec![0.0; self.regions],
        }
    }

    pub fn inputs(&self) -> ScenarioInputs {
        self.inputs_on(self.network(false), self.series())
    }

    pub fn inputs_on(&self, network: Network, series: TimeSeriesSet) -> ScenarioInputs {
        let pricing = PricingScheme {
            base_price: 0.0,
            alpha: 0.0,
            reference_gdp: 1.0,
            effective_price: self.prices[..network.regions.len()].to_vec(),
        };
        ScenarioInputs::new(Arc::new(network), Arc::new(series), pricing, FormulationOptions::default())
            .expect("valid toy inputs")
    }

    /// The toy restricted to region `n` alone.
    pub fn single_region(&self, n: usize) -> Toy {
        let mut cf = BTreeMap::new();
        for (k, table) in &self.capacity_factor {
            cf.insert(k.clone(), vec![table[n].clone()]);
        }
        Toy {
            regions: 1,
            carriers: self.carriers.clone(),
            steps: self.steps,
            demand: vec![self.demand[n].clone()],
            link_capacity: vec![],
            capacity_factor: cf,
            prices: vec![self.prices[n]],
        }
    }
}

/// Flow snapshot on an acyclic orientation with integer data.
#[derive(Debug, Clone)]
pub struct DagSnapshot {
    /// MW per `[node][carrier]`
    pub production: Vec<Vec<i64>>,
    pub withdrawal: Vec<i64>,
    pub link_ends: Vec<(usize, usize)>,
    /// Signed flow from `link_ends.0` to `link_ends.1`.
    pub flows: Vec<i64>,
}

impl DagSnapshot {
    pub fn random<R: Rng>(rng: &mut R, nodes: usize, carriers: usize) -> Self {
        let mut order: Vec<usize> = (0..nodes).collect();
        for i in (1..nodes).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let mut link_ends = Vec::new();
        let mut flows = Vec::new();
        for i in 0..nodes {
            for j in i + 1..nodes {
                if rng.random_bool(0.6) {
                    let (up, down) = (order[i], order[j]);
                    let f = rng.random_range(0..=50);
                    // random stored orientation, flow always runs up -> down
                    if rng.random_bool(0.5) {
                        link_ends.push((up, down));
                        flows.push(f);
                    } else {
                        link_ends.push((down, up));
                        flows.push(-f);
                    }
                }
            }
        }
        let mut export = vec![0i64; nodes];
        for (&(a, b), &f) in link_ends.iter().zip(&flows) {
            export[a] += f;
            export[b] -= f;
        }
        let mut production = Vec::with_capacity(nodes);
        let mut withdrawal = Vec::with_capacity(nodes);
        for &e in &export {
            let total = e.max(0) + rng.random_range(0..=30);
            let mut split = vec![0i64; carriers];
            let mut left = total;
            for s in 0..carriers - 1 {
                let x = rng.random_range(0..=left);
                split[s] = x;
                left -= x;
            }
            split[carriers - 1] = left;
            production.push(split);
            withdrawal.push(total - e);
        }
        DagSnapshot {
            production,
            withdrawal,
            link_ends,
            flows,
        }
    }

    /// Exact peer-to-peer allocation `[source][sink]` by proportional
    /// sharing along a topological order.
    pub fn proportional_sharing(&self) -> Vec<Vec<Q>> {
        let n = self.withdrawal.len();
        let inj: Vec<i64> = self.production.iter().map(|p| p.iter().sum()).collect();
        let mut directed: Vec<(usize, usize, i64)> = Vec::new();
        for (&(a, b), &f) in self.link_ends.iter().zip(&self.flows) {
            if f > 0 {
                directed.push((a, b, f));
            } else if f < 0 {
                directed.push((b, a, -f));
            }
        }
        let mut export = vec![0i64; n];
        for &(a, b, f) in &directed {
            export[a] += f;
            export[b] -= f;
        }
        let net_inj: Vec<i64> = export.iter().map(|&e| e.max(0)).collect();
        let net_wd: Vec<i64> = export.iter().map(|e| (-e).max(0)).collect();
        let own: Vec<i64> = (0..n).map(|k| (inj[k] - net_inj[k]).max(0)).collect();

        // Kahn's algorithm
        let mut indeg = vec![0usize; n];
        for &(_, b, _) in &directed {
            indeg[b] += 1;
        }
        let mut ready: Vec<usize> = (0..n).filter(|&k| indeg[k] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(k) = ready.pop() {
            topo.push(k);
            for &(a, b, _) in &directed {
                if a == k {
                    indeg[b] -= 1;
                    if indeg[b] == 0 {
                        ready.push(b);
                    }
                }
            }
        }
        assert_eq!(topo.len(), n, "snapshot must be acyclic");

        // mix[k][m]: share of the power passing k that was injected at m
        let mut mix = vec![vec![Q::zero(); n]; n];
        for &k in &topo {
            let inflow: i64 = directed.iter().filter(|d| d.1 == k).map(|d| d.2).sum();
            let through = net_inj[k] + inflow;
            if through == 0 {
                continue;
            }
            let mut m_k = vec![Q::zero(); n];
            m_k[k] += q(net_inj[k]);
            for &(a, _, f) in directed.iter().filter(|d| d.1 == k) {
                for m in 0..n {
                    m_k[m] += &mix[a][m] * q(f);
                }
            }
            for v in m_k.iter_mut() {
                *v /= q(through);
            }
            mix[k] = m_k;
        }
        let mut alloc = vec![vec![Q::zero(); n]; n];
        for sink in 0..n {
            for src in 0..n {
                alloc[src][sink] = &mix[sink][src] * q(net_wd[sink]);
            }
            alloc[sink][sink] += q(own[sink]);
        }
        alloc
    }
}

/// Largest relative deviation `|a - b| / max(1, |b|)`.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Budget of candidate bases for enumeration in tests.
pub const BUDGET: f64 = 3e6;

/// A random toy scenario small enough to enumerate.
pub fn enumerable_toy(rng: &mut ChaCha8Rng) -> Toy {
    const CARRIERS: [&str; 5] = ["wind", "solar", "coal", "gas", "battery"];
    loop {
        let regions = rng.random_range(1..=3);
        let count = rng.random_range(1..=3);
        let mut carriers: Vec<&'static str> = Vec::new();
        while carriers.len() < count {
            let c = CARRIERS[rng.random_range(0..CARRIERS.len())];
            if !carriers.contains(&c) {
                carriers.push(c);
            }
        }
        // at least one dispatchable technology keeps the toy feasible
        if !carriers.iter().any(|c| matches!(*c, "coal" | "gas")) {
            carriers[0] = "gas";
        }
        let steps = rng.random_range(1..=4);
        let toy = Toy::random(rng, regions, &carriers, steps);
        if enumeration_size(&build_lp(&toy.inputs()).unwrap().lp) <= BUDGET {
            return toy;
        }
    }
}

/// One-sided derivatives of the exact optimum with respect to a row's rhs.
pub fn one_sided(lp: &LinearProgram, row: usize) -> (f64, f64) {
    let h = 1.0 / 64.0;
    let base = lp.rows()[row].rhs;
    let at = |rhs: f64| {
        let mut p = lp.clone();
        p.set_rhs(row, rhs);
        match exact_simplex(&p) {
            Exact::Optimal(v) => v,
            other => panic!("perturbed problem is {other:?}"),
        }
    };
    let (lo, mid, hi) = (at(base - h), at(base), at(base + h));
    let hq = rat(h);
    (to_f64(&((&mid - lo) / &hq)), to_f64(&((hi - &mid) / &hq)))
}

