//! dB/linear conversions. Everything inside the library is linear; these are
//! only used where configs and sweep grids enter.

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Power in dB relative to a noise floor given in dBm.
pub fn dbm_relative_to_floor(dbm: f64, noise_floor_dbm: f64) -> f64 {
    dbm - noise_floor_dbm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_db_is_about_double() {
        assert!((db_to_linear(3.0) - 1.995_262_314_968_879_5).abs() < 1e-12);
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((linear_to_db(10.0) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn dbm_reference() {
        assert_eq!(dbm_relative_to_floor(30.0, 30.0), 0.0);
        assert_eq!(dbm_relative_to_floor(30.0, 20.0), 10.0);
    }
}
