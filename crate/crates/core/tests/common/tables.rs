//! Published region, link and cost tables, transcribed by hand.

/// (short code, GDP per capita [mu], population [m], mean demand [GW])
pub const REGIONS: [(&str, i64, f64, f64); 11] = [
    ("SC", 60149, 26.8, 45.4),
    ("GB", 44869, 71.3, 42.1),
    ("BE", 51745, 29.3, 23.8),
    ("FR", 41463, 67.0, 54.3),
    ("IB", 29193, 57.0, 34.8),
    ("IT", 34318, 60.4, 36.8),
    ("AL", 66877, 17.4, 15.0),
    ("DE", 48195, 82.9, 59.1),
    ("BC", 15998, 44.0, 21.6),
    ("EA", 15494, 52.3, 26.2),
    ("BK", 12842, 34.6, 17.5),
];

/// Mean demand in tenths of a GW, for exact arithmetic.
pub const DEMAND_TENTHS: [i64; 11] = [454, 421, 238, 543, 348, 368, 150, 591, 216, 262, 175];

pub const LINKS: [(&str, &str, f64); 21] = [
    ("IB", "FR", 8000.0),
    ("FR", "BE", 4300.0),
    ("FR", "GB", 5400.0),
    ("FR", "IT", 4350.0),
    ("FR", "AL", 3700.0),
    ("FR", "DE", 4800.0),
    ("SC", "GB", 1400.0),
    ("SC", "DE", 6715.0),
    ("SC", "BC", 2300.0),
    ("BE", "DE", 8300.0),
    ("IT", "AL", 7895.0),
    ("IT", "BK", 1880.0),
    ("AL", "DE", 12200.0),
    ("AL", "BK", 1200.0),
    ("AL", "EA", 2200.0),
    ("DE", "BC", 3000.0),
    ("DE", "EA", 2600.0),
    ("BC", "EA", 1590.0),
    ("EA", "BK", 6378.0),
    ("BE", "GB", 2000.0),
    ("SC", "BE", 1400.0),
];

/// (carrier, capital cost, marginal cost, emission factor)
pub const CARRIERS: [(&str, f64, f64, f64); 6] = [
    ("wind", 127450.0, 0.01, 0.0),
    ("solar", 61550.0, 0.01, 0.0),
    ("hydro", 0.0, 0.0, 0.0),
    ("coal", 145000.0, 25.0, 1.0),
    ("gas", 49400.0, 58.385, 0.635),
    ("battery", 120389.0, 0.0, 0.0),
];
