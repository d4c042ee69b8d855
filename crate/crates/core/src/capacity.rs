//! Integer capacity model: bytes per primer pair and per tube.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::EncodingScheme;

pub const DEFAULT_PAYLOAD_LEN: u64 = 200;
pub const DEFAULT_PARALLEL_FACTOR: u64 = 1_550_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid capacity parameters: {0}")]
pub struct CapacityError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CapacityParams {
    pub payload_len: u64,
    /// Encoding density as `density_num / density_den` bits per base.
    pub density_num: u64,
    pub density_den: u64,
    pub parallel_factor: u64,
    pub library_size: usize,
}

impl CapacityParams {
    pub fn new(
        payload_len: u64,
        density: (u64, u64),
        parallel_factor: u64,
        library_size: usize,
    ) -> Result<Self, CapacityError> {
        let p = CapacityParams {
            payload_len,
            density_num: density.0,
            density_den: density.1,
            parallel_factor,
            library_size,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn for_scheme(
        scheme: EncodingScheme,
        payload_len: u64,
        parallel_factor: u64,
        library_size: usize,
    ) -> Result<Self, CapacityError> {
        let (n, d) = scheme.density();
        Self::new(payload_len, (n as u64, d as u64), parallel_factor, library_size)
    }

    pub fn validate(&self) -> Result<(), CapacityError> {
        let fields = [
            ("payload_len", self.payload_len),
            ("density numerator", self.density_num),
            ("density denominator", self.density_den),
            ("parallel_factor", self.parallel_factor),
            ("library_size", self.library_size as u64),
        ];
        for (name, v) in fields {
            if v == 0 {
                return Err(CapacityError(format!("{name} must be positive")));
            }
        }
        if self.density_num > 2 * self.density_den {
            return Err(CapacityError(format!(
                "density {}/{} exceeds 2 bits per base",
                self.density_num, self.density_den
            )));
        }
        Ok(())
    }

    /// Whole bytes carried by one strand.
    pub fn strand_bytes(&self) -> u64 {
        (self.payload_len as u128 * self.density_num as u128 / (self.density_den as u128 * 8)) as u64
    }
}

pub fn pair_capacity_bytes(params: &CapacityParams) -> u64 {
    params.strand_bytes() * params.parallel_factor
}

pub fn tube_capacity_bytes(usable_primers: usize, params: &CapacityParams) -> u64 {
    (usable_primers / 2) as u64 * pair_capacity_bytes(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(density: (u64, u64)) -> CapacityParams {
        CapacityParams::new(200, density, DEFAULT_PARALLEL_FACTOR, 28_000).unwrap()
    }

    #[test]
    fn pair_capacities() {
        assert_eq!(pair_capacity_bytes(&params((8, 5))), 62_000_000);
        assert_eq!(pair_capacity_bytes(&params((1, 1))), 38_750_000);
        assert_eq!(pair_capacity_bytes(&params((19, 12))), 39 * 1_550_000);
        assert_eq!(pair_capacity_bytes(&params((16, 9))), 44 * 1_550_000);
    }

    #[test]
    fn cac_pair_close_to_36_mb() {
        // one pair holds about 36 MB under the CAC-like code
        let mb = pair_capacity_bytes(&params((1, 1))) as f64 / 1e6;
        assert!((mb - 36.0).abs() / 36.0 < 0.08, "{mb}");
    }

    #[test]
    fn tube_capacities() {
        let p = params((19, 12));
        assert_eq!(tube_capacity_bytes(0, &p), 0);
        assert_eq!(tube_capacity_bytes(3, &p), pair_capacity_bytes(&p));
        assert_eq!(tube_capacity_bytes(28_000, &p), 14_000 * 39 * 1_550_000);
        assert_eq!(tube_capacity_bytes(28_000, &p), 846_300_000_000);
    }

    #[test]
    fn invalid_params() {
        assert!(CapacityParams::new(200, (0, 1), 1, 10).is_err());
        assert!(CapacityParams::new(200, (5, 2), 1, 10).is_err());
        assert!(CapacityParams::new(0, (1, 1), 1, 10).is_err());
        assert!(CapacityParams::new(200, (2, 1), 1, 10).is_ok());
    }

    proptest! {
        #[test]
        fn monotone(u in 0usize..30_000, len in 1u64..400, pf in 1u64..2_000_000, num in 1u64..20, den in 1u64..20) {
            prop_assume!(num <= 2 * den);
            let p = CapacityParams::new(len, (num, den), pf, 30_000).unwrap();
            prop_assert!(tube_capacity_bytes(u, &p) <= tube_capacity_bytes(u + 1, &p));
            let longer = CapacityParams { payload_len: len + 1, ..p };
            prop_assert!(tube_capacity_bytes(u, &p) <= tube_capacity_bytes(u, &longer));
            let wider = CapacityParams { parallel_factor: pf + 1, ..p };
            prop_assert!(tube_capacity_bytes(u, &p) <= tube_capacity_bytes(u, &wider));
            let denser = CapacityParams { density_num: num + 1, density_den: den, ..p };
            if num < 2 * den {
                prop_assert!(tube_capacity_bytes(u, &p) <= tube_capacity_bytes(u, &denser));
            }
        }
    }
}
