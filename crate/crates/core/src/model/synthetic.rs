//! Deterministic synthetic weather and load series.
//!
//! Demand follows a daily sinusoid around each region's mean demand with
//! small Gaussian noise. Solar follows `max(0, sin(pi * hour / 24))` scaled
//! by a seasonal factor; wind is a logistic transform of an hourly AR(1)
//! process, which keeps it smooth and inside [0, 1]. Hydro inflow is
//! constant.
use super::{default_hydro, ModelError, Network, TimeSeriesSet};
use chrono::{NaiveDate, TimeDelta};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::BTreeMap;
use std::f64::consts::PI;

const DEMAND_AMPLITUDE: f64 = 0.2;
const DEMAND_NOISE: f64 = 0.05;
const WIND_PERSISTENCE: f64 = 0.97;
const WIND_SPREAD: f64 = 1.2;
const WIND_SEASONALITY: f64 = 0.4;
const SOLAR_SEASONALITY: f64 = 0.4;
/// Constant inflow as a fraction of installed reservoir power.
const INFLOW_FRACTION: f64 = 0.35;

/// (solar base factor, wind logit offset) for the bundled region codes.
fn climate(code: &str) -> (f64, f64) {
    match code {
        "SC" => (0.13, -0.55),
        "GB" => (0.15, -0.45),
        "BE" => (0.16, -0.70),
        "FR" => (0.20, -1.00),
        "IB" => (0.26, -1.15),
        "IT" => (0.24, -1.40),
        "AL" => (0.19, -1.70),
        "DE" => (0.16, -0.85),
        "BC" => (0.15, -0.90),
        "EA" => (0.18, -1.30),
        "BK" => (0.22, -1.35),
        _ => (0.18, -1.00),
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Generates `hours` hourly steps starting 2013-01-01T00:00.
///
/// Identical `(network, hours, seed)` give bit-identical output.
pub fn synthetic_timeseries(
    network: &Network,
    hours: usize,
    seed: u64,
) -> Result<TimeSeriesSet, ModelError> {
    if hours == 0 {
        return Err(ModelError::EmptySeries);
    }
    let start = NaiveDate::from_ymd_opt(2013, 1, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap();
    let timestamps = (0..hours)
        .map(|t| start + TimeDelta::hours(t as i64))
        .collect();
    let nr = network.regions.len();
    let (power, energy) = default_hydro(network);

    let mut demand = Vec::with_capacity(nr);
    let mut solar = Vec::with_capacity(nr);
    let mut wind = Vec::with_capacity(nr);
    for (n, region) in network.regions.iter().enumerate() {
        let (solar_base, wind_offset) = climate(&region.short_code);
        let mean_mw = region.mean_demand * 1000.0;

        let mut rng = stream(seed, 2 * n as u64);
        demand.push(
            (0..hours)
                .map(|t| {
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    let daily = (2.0 * PI * t as f64 / 24.0).sin();
                    mean_mw * (1.0 + DEMAND_AMPLITUDE * daily + DEMAND_NOISE * noise).max(0.0)
                })
                .collect::<Vec<_>>(),
        );

        solar.push(
            (0..hours)
                .map(|t| {
                    let day = (t / 24) as f64;
                    let seasonal = solar_base
                        * (1.0 + SOLAR_SEASONALITY * (2.0 * PI * (day - 172.0) / 365.0).cos());
                    let diurnal = (PI * (t % 24) as f64 / 24.0).sin().max(0.0);
                    (diurnal * seasonal).clamp(0.0, 1.0)
                })
                .collect::<Vec<_>>(),
        );

        let mut rng = stream(seed, 2 * n as u64 + 1);
        let mut state: f64 = StandardNormal.sample(&mut rng);
        let innovation = (1.0 - WIND_PERSISTENCE * WIND_PERSISTENCE).sqrt();
        wind.push(
            (0..hours)
                .map(|t| {
                    if t > 0 {
                        let e: f64 = StandardNormal.sample(&mut rng);
                        state = WIND_PERSISTENCE * state + innovation * e;
                    }
                    let day = (t / 24) as f64;
                    let season = WIND_SEASONALITY * (2.0 * PI * day / 365.0).cos();
                    logistic(wind_offset + season + WIND_SPREAD * state)
                })
                .collect::<Vec<_>>(),
        );
    }

    let mut capacity_factor = BTreeMap::new();
    for carrier in network.carriers.iter().filter(|c| c.uses_capacity_factor_series) {
        let series = match carrier.name.as_str() {
            "solar" => solar.clone(),
            _ => wind.clone(),
        };
        capacity_factor.insert(carrier.name.clone(), series);
    }

    Ok(TimeSeriesSet {
        timestamps,
        demand,
        capacity_factor,
        hydro_inflow: power
            .iter()
            .map(|p| vec![INFLOW_FRACTION * p; hours])
            .collect(),
        hydro_energy_capacity: energy,
        hydro_power_capacity: power,
    })
}

/// A full synthetic year (8760 hours).
pub fn synthetic_year(network: &Network, seed: u64) -> TimeSeriesSet {
    synthetic_timeseries(network, 8760, seed).expect("8760 > 0")
}
