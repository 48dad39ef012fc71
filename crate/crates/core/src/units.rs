use core::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Wavelength stored in hundredths of a nanometre.
///
/// Band and subband edges use this type so that tiling checks are exact
/// integer comparisons. It serializes as a plain number of nanometres.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Wavelength(i64);

impl Wavelength {
    pub const fn from_centi_nm(centi: i64) -> Self {
        Wavelength(centi)
    }

    /// Rounds to the nearest 0.01 nm.
    pub fn from_nm(nm: f64) -> Self {
        Wavelength(libm::round(nm * 100.0) as i64)
    }

    pub const fn centi_nm(self) -> i64 {
        self.0
    }

    pub fn nm(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Wavelength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}", self.nm())
    }
}

impl Serialize for Wavelength {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.nm())
    }
}

impl<'de> Deserialize<'de> for Wavelength {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let nm = f64::deserialize(deserializer)?;
        if !nm.is_finite() {
            return Err(serde::de::Error::custom("wavelength must be finite"));
        }
        Ok(Wavelength::from_nm(nm))
    }
}

/// Optical frequency in GHz of a vacuum wavelength given in nm.
pub fn nm_to_ghz(nm: f64) -> f64 {
    // c [m/s] / (nm * 1e-9) [m] = c / nm * 1e9 Hz = c / nm GHz
    SPEED_OF_LIGHT / nm
}

pub fn ghz_to_nm(ghz: f64) -> f64 {
    SPEED_OF_LIGHT / ghz
}

/// Width in nm of a frequency interval `spacing_ghz` around `wavelength_nm`.
pub fn spacing_nm_at(wavelength_nm: f64, spacing_ghz: f64) -> f64 {
    wavelength_nm * wavelength_nm * spacing_ghz / SPEED_OF_LIGHT
}

/// Linear transmittance of a loss in dB.
pub fn db_to_linear(loss_db: f64) -> f64 {
    libm::pow(10.0, -loss_db / 10.0)
}

pub fn linear_to_db(transmittance: f64) -> f64 {
    -10.0 * libm::log10(transmittance)
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    libm::pow(10.0, dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * libm::log10(mw)
}

/// Rounds `value` to the nearest multiple of `step` (e.g. 0.1 dB).
pub fn round_to(value: f64, step: f64) -> f64 {
    libm::round(value / step) * step
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavelength_rounds_to_hundredths() {
        assert_eq!(Wavelength::from_nm(1552.524).centi_nm(), 155_252);
        assert_eq!(Wavelength::from_nm(1280.0).nm(), 1280.0);
    }

    #[test]
    fn hundred_ghz_is_about_point_eight_nm_in_c_band() {
        let s = spacing_nm_at(1550.0, 100.0);
        assert!((s - 0.8014).abs() < 1e-3, "{s}");
        assert_eq!(round_to(s, 0.01), 0.8);
    }

    #[test]
    fn db_conversions_are_inverse() {
        for db in [0.0, 3.0, 23.15, 40.0] {
            assert!((linear_to_db(db_to_linear(db)) - db).abs() < 1e-12);
        }
        assert!((dbm_to_mw(-13.0) - 0.050_118_723).abs() < 1e-9);
        assert!((mw_to_dbm(1.0)).abs() < 1e-12);
    }
}
