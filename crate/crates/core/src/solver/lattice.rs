use crate::error::{Error, Result};
use crate::model::Bounds;

/// Upper limit on the number of lattice points any enumeration will visit.
pub const MAX_LATTICE_POINTS: u64 = 10_000_000;

/// Integer values contained in `[lo, hi]`, as an inclusive `(first, last)`
/// pair. `first > last` when the interval holds no integer.
pub fn integer_range((lo, hi): Bounds) -> (i64, i64) {
    (lo.ceil() as i64, hi.floor() as i64)
}

/// Number of integer points in the box, as a float so huge boxes do not
/// overflow.
pub fn lattice_size(domain_box: &[Bounds]) -> f64 {
    domain_box
        .iter()
        .map(|&b| {
            let (first, last) = integer_range(b);
            (last - first + 1).max(0) as f64
        })
        .product()
}

/// Odometer over every integer point of a box, last coordinate fastest.
#[derive(Debug, Clone)]
pub struct LatticePoints {
    ranges: Vec<(i64, i64)>,
    current: Option<Vec<i64>>,
}

impl Iterator for LatticePoints {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        let current = self.current.as_mut()?;
        let out = current.iter().map(|&v| v as f64).collect();
        let mut i = current.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if current[i] < self.ranges[i].1 {
                current[i] += 1;
                break;
            }
            current[i] = self.ranges[i].0;
        }
        Some(out)
    }
}

pub fn lattice_points(domain_box: &[Bounds]) -> Result<LatticePoints> {
    let size = lattice_size(domain_box);
    if size > MAX_LATTICE_POINTS as f64 {
        return Err(Error::BoxTooLarge {
            points: size,
            limit: MAX_LATTICE_POINTS,
        });
    }
    let ranges: Vec<(i64, i64)> = domain_box.iter().map(|&b| integer_range(b)).collect();
    let current = if size == 0.0 || ranges.is_empty() {
        None
    } else {
        Some(ranges.iter().map(|r| r.0).collect())
    };
    Ok(LatticePoints { ranges, current })
}
