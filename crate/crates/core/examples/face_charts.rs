//! Parametric face charts: points, tangents, unit normals, surface factors and
//! Newton inversion for each chart kind.

use std::f64::consts::PI;

use curvem::face_maps::FaceMap;
use curvem::Vec3;

fn main() -> curvem::Result<()> {
    let charts = [
        FaceMap::affine(Vec3::zeros(), Vec3::x(), Vec3::y()),
        FaceMap::bilinear(
            Vec3::zeros(),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.3),
            Vec3::new(0.0, 1.0, 0.0),
        ),
        FaceMap::Cylinder { radius: 1.0, theta0: 0.0, theta1: PI / 2.0, z0: 0.0, z1: 1.0 },
        FaceMap::GraphSin { x0: 0.0, dx: 0.5, y0: 0.0, dy: 0.5, level: 1.0, amplitude: 0.1 },
        FaceMap::GraphStrip { x0: 0.0, dx: 0.5, y0: 0.0, lo: 0.5, hi: 1.0, amplitude: 0.1 },
    ];
    for map in &charts {
        let (u, v) = (0.3, 0.7);
        let x = map.eval(u, v);
        let (n, jac) = map.jacobian_normal(u, v)?;
        let (ub, vb) = map.invert(&x)?;
        println!(
            "{:<12} γ(0.3, 0.7) = ({:.4}, {:.4}, {:.4})  n = ({:+.4}, {:+.4}, {:+.4})  |J| = {:.4}  inverse error {:.1e}",
            map.kind_name(),
            x.x,
            x.y,
            x.z,
            n.x,
            n.y,
            n.z,
            jac,
            (ub - u).abs() + (vb - v).abs()
        );
    }
    Ok(())
}
