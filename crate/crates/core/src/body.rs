use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feasible set for the convex learners. Both shapes are centred at the
/// origin and must contain the unit ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConvexBody {
    Ball { dim: usize, radius: f64 },
    Box { dim: usize, half_width: f64 },
}

impl ConvexBody {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        Self::Ball { dim, radius }.validated()
    }

    pub fn cube(dim: usize, half_width: f64) -> Result<Self> {
        Self::Box { dim, half_width }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let (dim, size) = match self {
            Self::Ball { dim, radius } => (dim, radius),
            Self::Box { dim, half_width } => (dim, half_width),
        };
        if dim == 0 {
            return Err(Error::Config("body dimension must be positive".into()));
        }
        if !(size >= 1.0 && size.is_finite()) {
            return Err(Error::Config(format!("body must contain the unit ball, size {size}")));
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        match *self {
            Self::Ball { dim, .. } | Self::Box { dim, .. } => dim,
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Self::Ball { radius, .. } => 2.0 * radius,
            Self::Box { dim, half_width } => 2.0 * half_width * (dim as f64).sqrt(),
        }
    }

    /// Euclidean projection onto `(1 - delta) K`.
    pub fn project_shrunk(&self, x: &mut [f64], delta: f64) {
        let s = 1.0 - delta;
        match *self {
            Self::Ball { radius, .. } => {
                let r = s * radius;
                let norm = norm(x);
                if norm > r {
                    x.iter_mut().for_each(|v| *v *= r / norm);
                }
            }
            Self::Box { half_width, .. } => {
                let b = s * half_width;
                x.iter_mut().for_each(|v| *v = v.clamp(-b, b));
            }
        }
    }

    pub fn project(&self, x: &mut [f64]) {
        self.project_shrunk(x, 0.0)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match *self {
            Self::Ball { radius, .. } => norm(x) <= radius + tol,
            Self::Box { half_width, .. } => x.iter().all(|v| v.abs() <= half_width + tol),
        }
    }

    /// Minimiser of `<g, x>` over the body (the origin when `g = 0`).
    pub fn argmin_linear(&self, g: &[f64]) -> Vec<f64> {
        match *self {
            Self::Ball { radius, .. } => {
                let n = norm(g);
                if n == 0.0 {
                    vec![0.0; g.len()]
                } else {
                    g.iter().map(|v| -radius * v / n).collect()
                }
            }
            Self::Box { half_width, .. } => g
                .iter()
                .map(|&v| if v > 0.0 { -half_width } else if v < 0.0 { half_width } else { 0.0 })
                .collect(),
        }
    }

    /// Regular grid over the body with `per_dim` points per axis.
    pub fn grid(&self, per_dim: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let half = match *self {
            Self::Ball { radius, .. } => radius,
            Self::Box { half_width, .. } => half_width,
        };
        let axis: Vec<f64> = (0..per_dim)
            .map(|i| if per_dim == 1 { 0.0 } else { -half + 2.0 * half * i as f64 / (per_dim - 1) as f64 })
            .collect();
        let total = per_dim.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                (0..n)
                    .map(|_| {
                        let v = axis[idx % per_dim];
                        idx /= per_dim;
                        v
                    })
                    .collect::<Vec<f64>>()
            })
            .filter(|p| self.contains(p, 1e-12))
            .collect()
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrunk_projection() {
        let ball = ConvexBody::ball(2, 1.0).unwrap();
        let mut x = vec![3.0, 4.0];
        ball.project_shrunk(&mut x, 0.5);
        assert!((x[0] - 0.3).abs() < 1e-12 && (x[1] - 0.4).abs() < 1e-12);
        let cube = ConvexBody::cube(2, 2.0).unwrap();
        let mut y = vec![3.0, -0.5];
        cube.project_shrunk(&mut y, 0.25);
        assert_eq!(y, vec![1.5, -0.5]);
    }

    #[test]
    fn diameters() {
        assert_eq!(ConvexBody::ball(3, 1.5).unwrap().diameter(), 3.0);
        assert!((ConvexBody::cube(2, 1.0).unwrap().diameter() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn must_contain_unit_ball() {
        assert!(ConvexBody::ball(2, 0.5).is_err());
        assert!(ConvexBody::cube(0, 1.0).is_err());
    }

    #[test]
    fn grid_points_lie_in_body() {
        let ball = ConvexBody::ball(2, 1.0).unwrap();
        let g = ball.grid(21);
        assert!(g.iter().all(|p| norm(p) <= 1.0 + 1e-12));
        assert!(g.len() < 21 * 21 && g.len() > 300);
    }
}
