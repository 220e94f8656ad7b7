//! GDP-indexed regional carbon prices.
//!
//! Each region pays `max(0, base * (1 + alpha * (gdp / reference - 1)))` per
//! tonne, where `reference` is the demand-weighted mean GDP per capita. Below
//! the clipping threshold for `alpha` the demand-weighted mean price equals
//! the base price; above it, clipping at zero lifts the mean.
use crate::model::Region;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PricingError {
    #[error("cannot weight GDP over an empty region list")]
    NoRegions,
    #[error("invalid pricing parameter: {0}")]
    InvalidParameter(String),
}

/// Where the demand weights for the reference GDP come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GdpWeighting {
    /// Tabulated mean demand per region.
    #[default]
    TableMeanDemand,
    /// Sample means of the loaded demand series.
    SeriesMeanDemand,
}

/// Returns `sum(gdp * weight) / sum(weight)`.
pub fn weighted_gdp(gdp: &[f64], weights: &[f64]) -> Result<f64, PricingError> {
    if gdp.is_empty() || gdp.len() != weights.len() {
        return Err(PricingError::NoRegions);
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(PricingError::InvalidParameter(
            "demand weights must sum to a positive value".into(),
        ));
    }
    Ok(gdp.iter().zip(weights).map(|(g, w)| g * w).sum::<f64>() / total)
}

/// Demand-weighted average GDP per capita over the tabulated mean demands.
pub fn demand_weighted_gdp(regions: &[Region]) -> Result<f64, PricingError> {
    let gdp: Vec<f64> = regions.iter().map(|r| r.gdp_per_capita).collect();
    let weights: Vec<f64> = regions.iter().map(|r| r.mean_demand).collect();
    weighted_gdp(&gdp, &weights)
}

/// Effective price in mu/tCO2 for a region with GDP per capita `gdp`.
pub fn effective_price(gdp: f64, base_price: f64, alpha: f64, reference_gdp: f64) -> f64 {
    debug_assert!(reference_gdp > 0.0);
    (base_price * (1.0 + alpha * (gdp / reference_gdp - 1.0))).max(0.0)
}

/// Result of [`clipping_threshold_alpha`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClippingThreshold {
    /// Some price is clipped to zero for every `alpha` strictly above this value.
    Alpha(f64),
    /// The poorest region is at or above the reference GDP: no clipping for any `alpha`.
    Never,
}

impl ClippingThreshold {
    pub fn value(self) -> Option<f64> {
        match self {
            ClippingThreshold::Alpha(a) => Some(a),
            ClippingThreshold::Never => None,
        }
    }
}

/// `(1 - gdp_min / reference)^-1`, the `alpha` above which the poorest region's price clips.
pub fn clipping_threshold_alpha(regions: &[Region]) -> Result<ClippingThreshold, PricingError> {
    let reference = demand_weighted_gdp(regions)?;
    let gdp_min = regions
        .iter()
        .map(|r| r.gdp_per_capita)
        .fold(f64::INFINITY, f64::min);
    // Equal GDPs can land a few ulps either side of the reference.
    if gdp_min >= reference * (1.0 - 1e-12) {
        return Ok(ClippingThreshold::Never);
    }
    Ok(ClippingThreshold::Alpha(1.0 / (1.0 - gdp_min / reference)))
}

/// Base price, distribution parameter and the resulting per-region prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingScheme {
    pub base_price: f64,
    pub alpha: f64,
    pub reference_gdp: f64,
    /// mu/tCO2 per region, in network order.
    pub effective_price: Vec<f64>,
}

impl PricingScheme {
    pub fn new(
        regions: &[Region],
        base_price: f64,
        alpha: f64,
        reference_gdp: f64,
    ) -> Result<Self, PricingError> {
        if !(base_price >= 0.0 && base_price.is_finite()) {
            return Err(PricingError::InvalidParameter(format!(
                "base price {base_price} must be finite and >= 0"
            )));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(PricingError::InvalidParameter(format!(
                "alpha {alpha} must be finite and >= 0"
            )));
        }
        if !(reference_gdp > 0.0 && reference_gdp.is_finite()) {
            return Err(PricingError::InvalidParameter(format!(
                "reference GDP {reference_gdp} must be > 0"
            )));
        }
        Ok(PricingScheme {
            base_price,
            alpha,
            reference_gdp,
            effective_price: regions
                .iter()
                .map(|r| effective_price(r.gdp_per_capita, base_price, alpha, reference_gdp))
                .collect(),
        })
    }

    /// Scheme with the reference GDP weighted by tabulated mean demand.
    pub fn for_regions(regions: &[Region], base_price: f64, alpha: f64) -> Result<Self, PricingError> {
        let reference = demand_weighted_gdp(regions)?;
        Self::new(regions, base_price, alpha, reference)
    }

    /// Zero carbon price everywhere.
    pub fn zero(regions: &[Region]) -> Self {
        PricingScheme {
            base_price: 0.0,
            alpha: 0.0,
            reference_gdp: 1.0,
            effective_price: vec![0.0; regions.len()],
        }
    }

    /// Demand-weighted mean of the effective prices (weights: tabulated mean demand).
    pub fn weighted_mean_price(&self, regions: &[Region]) -> f64 {
        let weights: Vec<f64> = regions.iter().map(|r| r.mean_demand).collect();
        weighted_gdp(&self.effective_price, &weights).unwrap_or(0.0)
    }
}
