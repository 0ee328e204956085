use alloc::vec::Vec;

use crate::Error;

/// Piecewise-linear function over strictly increasing breakpoints, held flat
/// beyond both ends.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PiecewiseLinear {
    points: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, Error> {
        if points.len() < 2 {
            return Err(Error::invalid("curve", "needs at least two points"));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::invalid("curve", "points must be finite"));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid(
                "curve",
                "x values must be strictly increasing",
            ));
        }
        Ok(PiecewiseLinear { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eval(&self, x: f64) -> f64 {
        let pts = &self.points;
        let (x0, y0) = pts[0];
        if x <= x0 {
            return y0;
        }
        let (xn, yn) = pts[pts.len() - 1];
        if x >= xn {
            return yn;
        }
        // first breakpoint strictly above x; exists because x < xn
        let hi = pts.partition_point(|p| p.0 <= x);
        let (xa, ya) = pts[hi - 1];
        let (xb, yb) = pts[hi];
        ya + (yb - ya) * (x - xa) / (xb - xa)
    }

    /// Largest y value on the curve and the x where it first occurs.
    pub fn peak(&self) -> (f64, f64) {
        self.points
            .iter()
            .copied()
            .fold((f64::NAN, f64::NEG_INFINITY), |best, p| {
                if p.1 > best.1 {
                    p
                } else {
                    best
                }
            })
    }

    /// Inverse for a non-decreasing curve: the smallest x reaching `y`,
    /// clamped to the curve's x range.
    pub fn inverse(&self, y: f64) -> f64 {
        let pts = &self.points;
        if y <= pts[0].1 {
            return pts[0].0;
        }
        for w in pts.windows(2) {
            let ((xa, ya), (xb, yb)) = (w[0], w[1]);
            if y <= yb {
                if yb == ya {
                    return xa;
                }
                return xa + (xb - xa) * (y - ya) / (yb - ya);
            }
        }
        pts[pts.len() - 1].0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_short_or_unsorted() {
        assert!(PiecewiseLinear::new(vec![(0.0, 1.0)]).is_err());
        assert!(PiecewiseLinear::new(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(PiecewiseLinear::new(vec![(1.0, 1.0), (0.0, 2.0)]).is_err());
    }

    #[test]
    fn flat_outside() {
        let c = PiecewiseLinear::new(vec![(1.0, 2.0), (3.0, 4.0)]).unwrap();
        assert_eq!(c.eval(-5.0), 2.0);
        assert_eq!(c.eval(10.0), 4.0);
        assert_eq!(c.eval(2.0), 3.0);
    }

    #[test]
    fn inverse_round_trips_on_monotone_segment() {
        let c = PiecewiseLinear::new(vec![(0.0, 3.0), (0.5, 3.6), (1.0, 4.0)]).unwrap();
        for &x in &[0.1, 0.25, 0.5, 0.8] {
            let y = c.eval(x);
            assert!((c.inverse(y) - x).abs() < 1e-12);
        }
    }
}
