//! Reference rules: Gauss–Legendre on `[0,1]`, tensor rules on the unit square and
//! collapsed rules on triangles.

/// Gauss–Legendre rule with `n` points on `[0,1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Self { nodes, weights }
    }

    /// Smallest rule exact for polynomials of degree `degree`.
    pub fn for_degree(degree: usize) -> Self {
        Self::new(points_for_degree(degree))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let l = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(a + l * t))
            .sum::<f64>()
            * l
    }
}

/// Number of Gauss points needed to integrate degree `degree` exactly.
pub fn points_for_degree(degree: usize) -> usize {
    (degree + 2).div_ceil(2).max(1)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A 2D rule: points and weights.
#[derive(Debug, Clone, Default)]
pub struct Rule2 {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl Rule2 {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p[0], p[1]))
            .sum()
    }
}

/// `n × n` tensor Gauss rule on the unit square.
pub fn tensor_square(n: usize) -> Rule2 {
    let g = GaussLegendre::new(n);
    let mut r = Rule2::default();
    for j in 0..n {
        for i in 0..n {
            r.points.push([g.nodes[i], g.nodes[j]]);
            r.weights.push(g.weights[i] * g.weights[j]);
        }
    }
    r
}

/// Collapsed (Duffy) rule on the triangle `a, b, c`, exact to `degree`.
pub fn triangle(a: [f64; 2], b: [f64; 2], c: [f64; 2], degree: usize) -> Rule2 {
    let gs = GaussLegendre::for_degree(degree + 1);
    let gt = GaussLegendre::for_degree(degree);
    let area2 = ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs();
    let mut r = Rule2::default();
    for (&s, &ws) in gs.nodes.iter().zip(&gs.weights) {
        for (&t, &wt) in gt.nodes.iter().zip(&gt.weights) {
            // (s, t) ↦ barycentric (1 - s, s (1 - t), s t)
            let l1 = s * (1.0 - t);
            let l2 = s * t;
            let l0 = 1.0 - s;
            r.points.push([
                l0 * a[0] + l1 * b[0] + l2 * c[0],
                l0 * a[1] + l1 * b[1] + l2 * c[1],
            ]);
            r.weights.push(ws * wt * s * area2);
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_exactness_on_unit_interval() {
        for m in 1..=12 {
            let g = GaussLegendre::new(m);
            let p = 2 * m - 1;
            let v = g.integrate(0.0, 1.0, |x| x.powi(p as i32));
            assert!((v - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "m={m}");
            assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn triangle_rule_integrates_monomials() {
        // ∫_T x^a y^b over the unit triangle = a! b! / (a+b+2)!
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        for d in 0..8u32 {
            let r = triangle([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], d as usize);
            for a in 0..=d {
                let b = d - a;
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                let v = r.integrate(|x, y| x.powi(a as i32) * y.powi(b as i32));
                assert!((v - exact).abs() < 1e-14, "a={a} b={b}");
            }
        }
    }
}
