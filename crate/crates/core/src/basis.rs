//! Plane-wave index bookkeeping.

use crate::error::{Error, Result};

/// The truncated wave-vector set `{ |k_i| <= cutoff }^dim`, enumerated in a
/// fixed lexicographic order. Unused components of a 1D index stay zero.
#[derive(Debug, Clone)]
pub struct WaveBasis {
    dim: usize,
    cutoff: i64,
    points: Vec<[i64; 2]>,
}

impl WaveBasis {
    pub fn new(dim: usize, cutoff: i64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::BadDimension { dim });
        }
        assert!(cutoff >= 0);
        let mut points = Vec::new();
        match dim {
            1 => {
                for k in -cutoff..=cutoff {
                    points.push([k, 0]);
                }
            }
            _ => {
                for k0 in -cutoff..=cutoff {
                    for k1 in -cutoff..=cutoff {
                        points.push([k0, k1]);
                    }
                }
            }
        }
        Ok(WaveBasis { dim, cutoff, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[i64; 2]] {
        &self.points
    }

    pub fn index_of(&self, k: [i64; 2]) -> Option<usize> {
        if k[0].abs() > self.cutoff || k[1].abs() > self.cutoff {
            return None;
        }
        let side = (2 * self.cutoff + 1) as usize;
        let i0 = (k[0] + self.cutoff) as usize;
        match self.dim {
            1 => {
                if k[1] != 0 {
                    None
                } else {
                    Some(i0)
                }
            }
            _ => {
                let i1 = (k[1] + self.cutoff) as usize;
                Some(i0 * side + i1)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_enumeration() {
        let b = WaveBasis::new(1, 2).unwrap();
        assert_eq!(b.len(), 5);
        assert_eq!(b.points()[0], [-2, 0]);
        assert_eq!(b.points()[4], [2, 0]);
        assert_eq!(b.index_of([0, 0]), Some(2));
        assert_eq!(b.index_of([3, 0]), None);
        assert_eq!(b.index_of([1, 1]), None);
    }

    #[test]
    fn two_dimensional_enumeration_round_trips() {
        let b = WaveBasis::new(2, 3).unwrap();
        assert_eq!(b.len(), 49);
        for (i, k) in b.points().iter().enumerate() {
            assert_eq!(b.index_of(*k), Some(i));
        }
    }

    #[test]
    fn bad_dimension_rejected() {
        assert!(WaveBasis::new(3, 1).is_err());
    }
}
