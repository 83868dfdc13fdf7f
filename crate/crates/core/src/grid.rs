//! Uniform cubic grids on `[-L, L]³` (and a 1-D variant for sanity checks),
//! plus trilinear sampling of node fields.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid3 {
    /// Nodes per axis.
    pub n: usize,
    /// Half-width L; the cube is `[-L, L]³`.
    pub extent: f64,
}

impl Grid3 {
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < 4 || extent <= 0.0 {
            return Err(Error::InvalidArgument(
                "grid needs n >= 4 nodes per axis and positive extent".into(),
            ));
        }
        Ok(Self { n, extent })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.extent / (self.n as f64 - 1.0)
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.extent + self.h() * i as f64
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.n + j) * self.n + i
    }

    pub fn position(&self, flat: usize) -> [f64; 3] {
        let i = flat % self.n;
        let j = (flat / self.n) % self.n;
        let k = flat / (self.n * self.n);
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    pub fn contains(&self, x: &[f64; 3]) -> bool {
        x.iter().all(|c| c.abs() <= self.extent)
    }

    /// Evaluate a closure on every node.
    pub fn sample(&self, f: impl Fn(&[f64; 3]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|p| f(&self.position(p))).collect()
    }

    /// Trilinear interpolation of a node field; `None` outside the cube.
    pub fn trilinear(&self, field: &[f64], x: &[f64; 3]) -> Option<f64> {
        if !self.contains(x) {
            return None;
        }
        let h = self.h();
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for d in 0..3 {
            let t = (x[d] + self.extent) / h;
            let i = (t.floor() as usize).min(self.n - 2);
            base[d] = i;
            frac[d] = (t - i as f64).clamp(0.0, 1.0);
        }
        let mut acc = 0.0;
        for dz in 0..2 {
            for dy in 0..2 {
                for dx in 0..2 {
                    let w = (if dx == 1 { frac[0] } else { 1.0 - frac[0] })
                        * (if dy == 1 { frac[1] } else { 1.0 - frac[1] })
                        * (if dz == 1 { frac[2] } else { 1.0 - frac[2] });
                    acc += w * field[self.idx(base[0] + dx, base[1] + dy, base[2] + dz)];
                }
            }
        }
        Some(acc)
    }

    /// Dual (DFT) momentum grid frequencies for this grid: `2π m / (n h)` for
    /// `m = -n/2 .. n/2 - 1` (n even) reordered ascending.
    pub fn dual_frequencies(&self) -> Vec<f64> {
        let n = self.n as i64;
        let step = 2.0 * std::f64::consts::PI / (self.n as f64 * self.h());
        (-(n / 2)..(n - n / 2)).map(|m| m as f64 * step).collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Grid1 {
    pub n: usize,
    pub extent: f64,
}

impl Grid1 {
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < 4 || extent <= 0.0 {
            return Err(Error::InvalidArgument("1-D grid needs n >= 4, L > 0".into()));
        }
        Ok(Self { n, extent })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.extent / (self.n as f64 - 1.0)
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.extent + self.h() * i as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trilinear_reproduces_linear_fields_exactly() {
        let g = Grid3::new(9, 2.0).unwrap();
        let f = g.sample(|x| 1.0 + 2.0 * x[0] - 0.5 * x[1] + 3.0 * x[2]);
        for x in [[0.3, -1.1, 0.7], [1.99, 1.99, -1.99], [0.0, 0.0, 0.0]] {
            let v = g.trilinear(&f, &x).unwrap();
            let exact = 1.0 + 2.0 * x[0] - 0.5 * x[1] + 3.0 * x[2];
            assert!((v - exact).abs() < 1e-12);
        }
        assert!(g.trilinear(&f, &[2.5, 0.0, 0.0]).is_none());
    }

    #[test]
    fn dual_grid_spans_nyquist() {
        let g = Grid3::new(8, 4.0).unwrap();
        let k = g.dual_frequencies();
        assert_eq!(k.len(), 8);
        let dk = 2.0 * std::f64::consts::PI / (8.0 * g.h());
        assert!((k[1] - k[0] - dk).abs() < 1e-12);
        assert!((k[0] + 4.0 * dk).abs() < 1e-12);
    }
}
