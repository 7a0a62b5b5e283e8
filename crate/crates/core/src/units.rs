//! Unit conversions shared by the CLI and the encounter model.

/// Propagation speed used to derive the carrier wavelength.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

pub fn wavelength_from_carrier(carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_hz
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watt_to_dbm(watt: f64) -> f64 {
    10.0 * watt.log10() + 30.0
}

pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh / 3.6
}
