//! Low-discrepancy points: Halton sequences with random shifts, so the
//! spread over independent replicates yields a standard error.

const PRIMES: [u64; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

/// Radical-inverse of `index` in the given base.
fn radical_inverse(base: u64, mut index: u64) -> f64 {
    let mut inv = 0.0f64;
    let mut frac = 1.0f64 / base as f64;
    while index > 0 {
        inv += (index % base) as f64 * frac;
        index /= base;
        frac /= base as f64;
    }
    inv
}

pub struct ShiftedHalton {
    shifts: Vec<f64>,
    index: u64,
}

impl ShiftedHalton {
    pub fn new(dims: usize, shifts: Vec<f64>) -> Self {
        Self::with_start(dims, shifts, 1)
    }

    /// Starting the walk deeper into the sequence decorrelates replicates
    /// beyond the rotation alone.
    pub fn with_start(dims: usize, shifts: Vec<f64>, start: u64) -> Self {
        assert!(dims <= PRIMES.len(), "too many dimensions for Halton bases");
        assert_eq!(shifts.len(), dims);
        ShiftedHalton {
            shifts,
            index: start.max(1),
        }
    }

    pub fn next_point(&mut self, out: &mut [f64]) {
        for (d, o) in out.iter_mut().enumerate() {
            let v = radical_inverse(PRIMES[d], self.index) + self.shifts[d];
            *o = v - v.floor();
        }
        self.index += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_covers_evenly() {
        let mut h = ShiftedHalton::new(2, vec![0.0, 0.0]);
        let mut pt = [0.0; 2];
        let mut mean = [0.0; 2];
        let n = 4096;
        for _ in 0..n {
            h.next_point(&mut pt);
            mean[0] += pt[0];
            mean[1] += pt[1];
        }
        for m in mean {
            assert!((m / n as f64 - 0.5).abs() < 1e-2);
        }
    }
}
