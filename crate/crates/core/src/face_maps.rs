//! Parametric charts for faces.
//!
//! Every face carries a chart `γ: 𝔉 ⊂ [0,1]² → F`. The chart fixes the canonical
//! normal `∂γ/∂u × ∂γ/∂v / J`; a cell using the face flips it with its orientation sign.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{Error, Result, Vec3};

/// Surface factors below this are treated as a degenerate chart.
pub const MIN_SURFACE_FACTOR: f64 = 1e-14;

/// Chart kinds. All of them are analytic on the closed parameter square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum FaceMap {
    /// `γ(u,v) = origin + u e_u + v e_v`.
    Affine {
        origin: [f64; 3],
        e_u: [f64; 3],
        e_v: [f64; 3],
    },
    /// `γ(u,v) = (1-u)(1-v) A + u(1-v) B + u v C + (1-u) v D`.
    Bilinear { corners: [[f64; 3]; 4] },
    /// Vertical cylinder around the z axis: `θ = θ0 + u (θ1-θ0)`, `z = z0 + v (z1-z0)`.
    Cylinder {
        radius: f64,
        theta0: f64,
        theta1: f64,
        z0: f64,
        z1: f64,
    },
    /// Graph `z = level · (1 - amplitude · sin(π x))` over the rectangle
    /// `[x0, x0+dx] × [y0, y0+dy]`.
    GraphSin {
        x0: f64,
        dx: f64,
        y0: f64,
        dy: f64,
        level: f64,
        amplitude: f64,
    },
    /// Vertical strip in the plane `y = y0` between the graphs `z = lo · h(x)` and
    /// `z = hi · h(x)`, `h(x) = 1 - amplitude · sin(π x)`: `x = x0 + u dx`,
    /// `z = (lo + v (hi - lo)) h(x)`.
    GraphStrip {
        x0: f64,
        dx: f64,
        y0: f64,
        lo: f64,
        hi: f64,
        amplitude: f64,
    },
}

#[inline]
fn v3(a: &[f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

impl FaceMap {
    pub fn affine(origin: Vec3, e_u: Vec3, e_v: Vec3) -> Self {
        FaceMap::Affine {
            origin: origin.into(),
            e_u: e_u.into(),
            e_v: e_v.into(),
        }
    }

    pub fn bilinear(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> Self {
        FaceMap::Bilinear {
            corners: [a.into(), b.into(), c.into(), d.into()],
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FaceMap::Affine { .. } => "affine",
            FaceMap::Bilinear { .. } => "bilinear",
            FaceMap::Cylinder { .. } => "cylinder",
            FaceMap::GraphSin { .. } => "graph_sin",
            FaceMap::GraphStrip { .. } => "graph_strip",
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, FaceMap::Affine { .. })
    }

    /// Extra polynomial degree granted to quadrature on this chart to absorb the
    /// surface factor and non-polynomial coordinate functions.
    pub fn jacobian_allowance(&self) -> usize {
        match self {
            FaceMap::Affine { .. } => 0,
            FaceMap::Bilinear { .. } => 2,
            FaceMap::Cylinder { .. } | FaceMap::GraphSin { .. } | FaceMap::GraphStrip { .. } => 4,
        }
    }

    /// `γ(u, v)`.
    pub fn eval(&self, u: f64, v: f64) -> Vec3 {
        match self {
            FaceMap::Affine { origin, e_u, e_v } => v3(origin) + u * v3(e_u) + v * v3(e_v),
            FaceMap::Bilinear { corners: [a, b, c, d] } => {
                (1.0 - u) * (1.0 - v) * v3(a)
                    + u * (1.0 - v) * v3(b)
                    + u * v * v3(c)
                    + (1.0 - u) * v * v3(d)
            }
            FaceMap::Cylinder {
                radius,
                theta0,
                theta1,
                z0,
                z1,
            } => {
                let t = theta0 + u * (theta1 - theta0);
                Vec3::new(radius * t.cos(), radius * t.sin(), z0 + v * (z1 - z0))
            }
            FaceMap::GraphSin {
                x0,
                dx,
                y0,
                dy,
                level,
                amplitude,
            } => {
                let x = x0 + u * dx;
                Vec3::new(x, y0 + v * dy, level * (1.0 - amplitude * (PI * x).sin()))
            }
            FaceMap::GraphStrip {
                x0,
                dx,
                y0,
                lo,
                hi,
                amplitude,
            } => {
                let x = x0 + u * dx;
                Vec3::new(x, *y0, (lo + v * (hi - lo)) * (1.0 - amplitude * (PI * x).sin()))
            }
        }
    }

    /// `(∂γ/∂u, ∂γ/∂v)`.
    pub fn derivatives(&self, u: f64, v: f64) -> (Vec3, Vec3) {
        match self {
            FaceMap::Affine { e_u, e_v, .. } => (v3(e_u), v3(e_v)),
            FaceMap::Bilinear { corners: [a, b, c, d] } => {
                let (a, b, c, d) = (v3(a), v3(b), v3(c), v3(d));
                ((1.0 - v) * (b - a) + v * (c - d), (1.0 - u) * (d - a) + u * (c - b))
            }
            FaceMap::Cylinder {
                radius,
                theta0,
                theta1,
                z0,
                z1,
            } => {
                let dt = theta1 - theta0;
                let t = theta0 + u * dt;
                (
                    Vec3::new(-radius * dt * t.sin(), radius * dt * t.cos(), 0.0),
                    Vec3::new(0.0, 0.0, z1 - z0),
                )
            }
            FaceMap::GraphSin {
                x0,
                dx,
                dy,
                level,
                amplitude,
                ..
            } => {
                let x = x0 + u * dx;
                let dz = -level * amplitude * PI * (PI * x).cos() * dx;
                (Vec3::new(*dx, 0.0, dz), Vec3::new(0.0, *dy, 0.0))
            }
            FaceMap::GraphStrip {
                x0,
                dx,
                lo,
                hi,
                amplitude,
                ..
            } => {
                let x = x0 + u * dx;
                let level = lo + v * (hi - lo);
                let h = 1.0 - amplitude * (PI * x).sin();
                let dz = -level * amplitude * PI * (PI * x).cos() * dx;
                (Vec3::new(*dx, 0.0, dz), Vec3::new(0.0, 0.0, (hi - lo) * h))
            }
        }
    }

    /// Canonical unit normal and surface factor `J = ‖∂γ/∂u × ∂γ/∂v‖`.
    pub fn jacobian_normal(&self, u: f64, v: f64) -> Result<(Vec3, f64)> {
        let (gu, gv) = self.derivatives(u, v);
        let c = gu.cross(&gv);
        let j = c.norm();
        if j < MIN_SURFACE_FACTOR {
            return Err(Error::DegenerateChart(j, u, v));
        }
        Ok((c / j, j))
    }

    /// Size of the chart image, used to scale tolerances.
    pub fn scale(&self) -> f64 {
        let (gu, gv) = self.derivatives(0.5, 0.5);
        gu.norm().max(gv.norm()).max(1e-300)
    }

    /// Preimage of a point on the surface. Damped Gauss–Newton from `(0.5, 0.5)`.
    pub fn invert(&self, p: &Vec3) -> Result<(f64, f64)> {
        let scale = self.scale();
        let (mut u, mut v) = (0.5, 0.5);
        let mut r = self.eval(u, v) - p;
        let mut rn = r.norm();
        for _ in 0..50 {
            if rn <= 1e-13 * scale {
                break;
            }
            let (gu, gv) = self.derivatives(u, v);
            let (a11, a12, a22) = (gu.dot(&gu), gu.dot(&gv), gv.dot(&gv));
            let det = a11 * a22 - a12 * a12;
            if det.abs() < MIN_SURFACE_FACTOR * MIN_SURFACE_FACTOR {
                return Err(Error::InversionFailed("singular metric".into()));
            }
            let (b1, b2) = (gu.dot(&r), gv.dot(&r));
            let du = (a22 * b1 - a12 * b2) / det;
            let dv = (a11 * b2 - a12 * b1) / det;
            let mut step = 1.0;
            loop {
                let (nu, nv) = (u - step * du, v - step * dv);
                let nr = self.eval(nu, nv) - p;
                if nr.norm() < rn || step < 1e-4 {
                    u = nu;
                    v = nv;
                    r = nr;
                    rn = r.norm();
                    break;
                }
                step *= 0.5;
            }
        }
        if !(u.is_finite() && v.is_finite()) {
            return Err(Error::InversionFailed("non-finite iterate".into()));
        }
        if rn > 1e-9 * scale.max(p.norm()) {
            return Err(Error::InversionFailed(format!(
                "point off surface by {rn:.3e}"
            )));
        }
        Ok((u, v))
    }

    /// Copy with the canonical normal reversed (swaps the parameter axes).
    pub fn flipped(&self) -> FaceMap {
        match self.clone() {
            FaceMap::Affine { origin, e_u, e_v } => FaceMap::Affine {
                origin,
                e_u: e_v,
                e_v: e_u,
            },
            FaceMap::Bilinear { corners: [a, b, c, d] } => FaceMap::Bilinear {
                corners: [a, d, c, b],
            },
            FaceMap::Cylinder {
                radius,
                theta0,
                theta1,
                z0,
                z1,
            } => FaceMap::Cylinder {
                radius,
                theta0: theta1,
                theta1: theta0,
                z0,
                z1,
            },
            FaceMap::GraphSin {
                x0,
                dx,
                y0,
                dy,
                level,
                amplitude,
            } => FaceMap::GraphSin {
                x0: x0 + dx,
                dx: -dx,
                y0,
                dy,
                level,
                amplitude,
            },
            FaceMap::GraphStrip {
                x0,
                dx,
                y0,
                lo,
                hi,
                amplitude,
            } => FaceMap::GraphStrip {
                x0: x0 + dx,
                dx: -dx,
                y0,
                lo,
                hi,
                amplitude,
            },
        }
    }
}

/// Shape of a face edge between two consecutive vertices.
///
/// `Straight` means straight in the chart's parameter space. The curved variants
/// describe physical curves and are only used on affine (planar) charts, whose
/// parameter domain then has curved boundary pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeCurve {
    #[default]
    Straight,
    /// Horizontal circular arc around the z axis.
    Arc {
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
    /// Curve `z = level (1 - amplitude sin(π x))` with `x`, `y` linear between the endpoints.
    SinGraph { level: f64, amplitude: f64 },
}

impl EdgeCurve {
    pub fn is_straight(&self) -> bool {
        matches!(self, EdgeCurve::Straight)
    }

    /// Physical point at `t ∈ [0,1]` and its derivative, for an edge from `a` to `b`.
    pub fn point(&self, a: &Vec3, b: &Vec3, t: f64) -> (Vec3, Vec3) {
        match *self {
            EdgeCurve::Straight => (a + t * (b - a), b - a),
            EdgeCurve::Arc {
                radius,
                theta0,
                theta1,
            } => {
                let d = theta1 - theta0;
                let th = theta0 + t * d;
                let z = a.z + t * (b.z - a.z);
                (
                    Vec3::new(radius * th.cos(), radius * th.sin(), z),
                    Vec3::new(-radius * d * th.sin(), radius * d * th.cos(), b.z - a.z),
                )
            }
            EdgeCurve::SinGraph { level, amplitude } => {
                let x = a.x + t * (b.x - a.x);
                let y = a.y + t * (b.y - a.y);
                let z = level * (1.0 - amplitude * (PI * x).sin());
                let dz = -level * amplitude * PI * (PI * x).cos() * (b.x - a.x);
                (Vec3::new(x, y, z), Vec3::new(b.x - a.x, b.y - a.y, dz))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_maps() -> Vec<FaceMap> {
        vec![
            FaceMap::affine(
                Vec3::new(0.1, 0.2, 0.3),
                Vec3::new(0.5, 0.1, 0.0),
                Vec3::new(-0.1, 0.4, 0.2),
            ),
            FaceMap::bilinear(
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(1.0, 1.0, 0.2),
                Vec3::new(0.0, 1.0, 0.0),
            ),
            FaceMap::Cylinder {
                radius: 0.2,
                theta0: 0.0,
                theta1: PI,
                z0: 0.0,
                z1: 1.0,
            },
            FaceMap::GraphSin {
                x0: 0.25,
                dx: 0.25,
                y0: 0.5,
                dy: 0.25,
                level: 0.75,
                amplitude: 0.1,
            },
            FaceMap::GraphStrip {
                x0: 0.25,
                dx: 0.25,
                y0: 0.5,
                lo: 0.5,
                hi: 0.75,
                amplitude: 0.1,
            },
        ]
    }

    #[test]
    fn eval_examples() {
        let sq = FaceMap::affine(Vec3::zeros(), Vec3::x(), Vec3::y());
        assert!((sq.eval(0.5, 0.5) - Vec3::new(0.5, 0.5, 0.0)).norm() < 1e-15);
        let cyl = FaceMap::Cylinder {
            radius: 1.0,
            theta0: 0.0,
            theta1: PI,
            z0: 0.0,
            z1: 1.0,
        };
        assert!((cyl.eval(0.5, 0.3) - Vec3::new(0.0, 1.0, 0.3)).norm() < 1e-15);
        let bl = &sample_maps()[1];
        assert!((bl.eval(0.5, 0.5) - Vec3::new(0.5, 0.5, 0.05)).norm() < 1e-15);
    }

    #[test]
    fn normal_examples() {
        let top = FaceMap::affine(Vec3::new(0.0, 0.0, 1.0), Vec3::x(), Vec3::y());
        let (n, j) = top.jacobian_normal(0.3, 0.8).unwrap();
        assert!((n - Vec3::z()).norm() < 1e-15 && (j - 1.0).abs() < 1e-15);

        // inner cylinder: the cell flips the canonical (radially outward) normal
        let cyl = &sample_maps()[2];
        let (n, j) = cyl.jacobian_normal(0.3, 0.5).unwrap();
        let p = cyl.eval(0.3, 0.5);
        let toward_axis = -n;
        assert!(toward_axis.dot(&Vec3::new(-p.x, -p.y, 0.0)) > 0.0);
        assert!((j - 0.2 * PI).abs() < 1e-14);

        let g = FaceMap::GraphSin {
            x0: 0.0,
            dx: 1.0,
            y0: 0.0,
            dy: 1.0,
            level: 1.0,
            amplitude: 0.1,
        };
        for &u in &[0.0, 0.2, 0.5, 0.9] {
            let (n, j) = g.jacobian_normal(u, 0.4).unwrap();
            let expect = (1.0 + (0.1 * PI * (PI * u).cos()).powi(2)).sqrt();
            assert!((j - expect).abs() < 1e-14);
            assert!((n.z - 1.0 / expect).abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_chart_is_reported() {
        let m = FaceMap::affine(Vec3::zeros(), Vec3::x(), 2.0 * Vec3::x());
        assert!(matches!(
            m.jacobian_normal(0.5, 0.5),
            Err(Error::DegenerateChart(..))
        ));
    }

    #[test]
    fn inversion_examples() {
        let m = &sample_maps()[0];
        let (u, v) = m.invert(&m.eval(0.3, 0.7)).unwrap();
        assert!((u - 0.3).abs() < 1e-12 && (v - 0.7).abs() < 1e-12);
        let cyl = FaceMap::Cylinder {
            radius: 0.7,
            theta0: 0.0,
            theta1: PI,
            z0: 0.0,
            z1: 1.0,
        };
        let (u, v) = cyl.invert(&Vec3::new(0.0, 0.7, 0.5)).unwrap();
        assert!((u - 0.5).abs() < 1e-12 && (v - 0.5).abs() < 1e-12);
        assert!(cyl.invert(&Vec3::new(0.0, 0.9, 0.5)).is_err());
    }

    #[test]
    fn affine_surface_factor_is_constant() {
        let m = &sample_maps()[0];
        let js: Vec<f64> = (0..10)
            .map(|i| m.jacobian_normal(i as f64 / 9.0, 0.3).unwrap().1)
            .collect();
        let mean = js.iter().sum::<f64>() / js.len() as f64;
        let var = js.iter().map(|j| (j - mean).powi(2)).sum::<f64>() / js.len() as f64;
        assert!(var < 1e-14);
    }

    #[test]
    fn flipped_reverses_normal() {
        for m in sample_maps() {
            let f = m.flipped();
            let (n, _) = m.jacobian_normal(0.4, 0.6).unwrap();
            let p = m.eval(0.4, 0.6);
            let (u, v) = f.invert(&p).unwrap();
            let (nf, _) = f.jacobian_normal(u, v).unwrap();
            assert!((n + nf).norm() < 1e-10, "{}", m.kind_name());
        }
    }

    proptest! {
        #[test]
        fn derivatives_match_finite_differences(u in 0.05f64..0.95, v in 0.05f64..0.95) {
            let h = 1e-6;
            for m in sample_maps() {
                let (gu, gv) = m.derivatives(u, v);
                let fu = (m.eval(u + h, v) - m.eval(u - h, v)) / (2.0 * h);
                let fv = (m.eval(u, v + h) - m.eval(u, v - h)) / (2.0 * h);
                prop_assert!((gu - fu).norm() <= 1e-7 * gu.norm().max(1.0));
                prop_assert!((gv - fv).norm() <= 1e-7 * gv.norm().max(1.0));
            }
        }

        #[test]
        fn invert_eval_roundtrip(u in 0.01f64..0.99, v in 0.01f64..0.99) {
            for m in sample_maps() {
                let (a, b) = m.invert(&m.eval(u, v)).unwrap();
                prop_assert!((m.eval(a, b) - m.eval(u, v)).norm() < 1e-10);
                prop_assert!((a - u).abs() < 1e-10 && (b - v).abs() < 1e-10);
            }
        }
    }
}
