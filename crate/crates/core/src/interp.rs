//! Piecewise-cubic interpolation on sorted abscissae.

use crate::error::{Error, Result};

/// Cubic Hermite interpolant with prescribed derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermite {
    x: Vec<f64>,
    y: Vec<f64>,
    dy: Vec<f64>,
}

impl Hermite {
    pub fn new(x: Vec<f64>, y: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || x.len() != y.len() || x.len() != dy.len() {
            return Err(Error::InvalidParameter(
                "interpolation needs at least two nodes with matching values".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("interpolation nodes must increase strictly".into()));
        }
        Ok(Self { x, y, dy })
    }

    /// Monotone piecewise-cubic (Fritsch-Carlson) interpolant.
    pub fn pchip(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::InvalidParameter("PCHIP needs at least two nodes".into()));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let s: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = s[0];
            d[1] = s[0];
        } else {
            for i in 1..n - 1 {
                if s[i - 1] * s[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
                }
            }
            d[0] = end_slope(h[0], h[1], s[0], s[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
        }
        Self::new(x, y, d)
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Value and derivative; clamps outside the node range.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let n = self.x.len();
        if t <= self.x[0] {
            return (self.y[0], if t == self.x[0] { self.dy[0] } else { 0.0 });
        }
        if t >= self.x[n - 1] {
            return (self.y[n - 1], if t == self.x[n - 1] { self.dy[n - 1] } else { 0.0 });
        }
        let i = match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        let (y0, y1, d0, d1) = (self.y[i], self.y[i + 1], self.dy[i] * h, self.dy[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        let v = (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * d0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * d1;
        let dv = ((6.0 * u2 - 6.0 * u) * y0
            + (3.0 * u2 - 4.0 * u + 1.0) * d0
            + (-6.0 * u2 + 6.0 * u) * y1
            + (3.0 * u2 - 2.0 * u) * d1)
            / h;
        (v, dv)
    }
}

fn end_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d * s0 <= 0.0 {
        0.0
    } else if s0 * s1 <= 0.0 && d.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |x: f64| x * x * x - 2.0 * x + 1.0;
        let df = |x: f64| 3.0 * x * x - 2.0;
        let xs = vec![0.0, 0.5, 1.3, 2.0];
        let h = Hermite::new(xs.clone(), xs.iter().map(|&x| f(x)).collect(), xs.iter().map(|&x| df(x)).collect())
            .unwrap();
        for t in [0.1, 0.77, 1.9] {
            let (v, d) = h.eval(t);
            assert!((v - f(t)).abs() < 1e-13 && (d - df(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_unsorted_nodes() {
        assert!(Hermite::pchip(vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn pchip_preserves_monotone_data(steps in proptest::collection::vec(0.0f64..1.0, 3..12)) {
            let x: Vec<f64> = (0..=steps.len()).map(|i| i as f64).collect();
            let mut y = vec![0.0];
            for s in &steps { y.push(y.last().unwrap() + s); }
            let p = Hermite::pchip(x, y).unwrap();
            let mut prev = f64::NEG_INFINITY;
            for k in 0..=200 {
                let (v, _) = p.eval(k as f64 * steps.len() as f64 / 200.0);
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
