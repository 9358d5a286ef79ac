//! Closed-form eigen decomposition of symmetric 3×3 matrices.

use std::f64::consts::PI;

use crate::geometry::{self, Vec3};

/// Upper triangle of a symmetric 3×3 matrix: `[xx, yy, zz, xy, xz, yz]`.
pub type Sym3 = [f64; 6];

/// Eigenvalues in descending signed order, by the trigonometric solution of the
/// characteristic cubic.
pub fn sym3_eigenvalues(m: &Sym3) -> [f64; 3] {
    let [a11, a22, a33, a12, a13, a23] = *m;
    let p1 = a12 * a12 + a13 * a13 + a23 * a23;
    if p1 == 0.0 {
        let mut d = [a11, a22, a33];
        d.sort_by(|a, b| b.total_cmp(a));
        return d;
    }
    let q = (a11 + a22 + a33) / 3.0;
    let (b11, b22, b33) = (a11 - q, a22 - q, a33 - q);
    let p2 = b11 * b11 + b22 * b22 + b33 * b33 + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return [q, q, q];
    }
    let inv = 1.0 / p;
    let (c11, c22, c33) = (b11 * inv, b22 * inv, b33 * inv);
    let (c12, c13, c23) = (a12 * inv, a13 * inv, a23 * inv);
    let det = c11 * (c22 * c33 - c23 * c23) - c12 * (c12 * c33 - c23 * c13)
        + c13 * (c12 * c23 - c22 * c13);
    let r = (det / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    [e1, e2, e3]
}

/// Sorts by absolute value ascending, ties broken by signed value ascending.
pub fn sort_by_magnitude(mut e: [f64; 3]) -> [f64; 3] {
    e.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
    e
}

/// Unit eigenvector for `lambda`, from the largest cross product of two rows of
/// `A - λI`. Returns `None` when the eigenspace is not one-dimensional to working
/// precision.
pub fn sym3_eigenvector(m: &Sym3, lambda: f64) -> Option<Vec3> {
    let [a11, a22, a33, a12, a13, a23] = *m;
    let r0 = [a11 - lambda, a12, a13];
    let r1 = [a12, a22 - lambda, a23];
    let r2 = [a13, a23, a33 - lambda];
    let candidates = [
        geometry::cross(r0, r1),
        geometry::cross(r0, r2),
        geometry::cross(r1, r2),
    ];
    let best = candidates
        .into_iter()
        .max_by(|a, b| geometry::dot(*a, *a).total_cmp(&geometry::dot(*b, *b)))
        .expect("three candidates");
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(lambda.abs());
    let n = geometry::norm(best);
    if n <= 1e-12 * scale * scale || n == 0.0 {
        return None;
    }
    Some(geometry::scale(best, 1.0 / n))
}
