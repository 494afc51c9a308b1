//! Centripetal radial drift `b(x) = −c x |x|^{-2}`.

use std::f64::consts::PI;

use super::{bump_moment, DriftField, Provenance, Repr};

impl DriftField {
    /// `b(x) = −c x |x|^{-2}` with divergence `−c (d−2) |x|^{-2}` away from 0.
    pub fn radial(c: f64, dim: usize) -> Self {
        assert!(dim >= 2, "radial drift needs d >= 2");
        Self {
            dim,
            provenance: Provenance::Radial { c },
            mollification_level: None,
            repr: Repr::Radial { c },
        }
    }
}

pub(super) fn eval(c: f64, x: &[f64], out: &mut [f64]) {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 == 0.0 || c == 0.0 {
        out.iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    for (o, xi) in out.iter_mut().zip(x) {
        *o = -c * xi / r2;
    }
}

pub(super) fn divergence(c: f64, x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if c == 0.0 || d == 2.0 {
        // in the plane the divergence is a point mass at the origin
        return 0.0;
    }
    if r2 == 0.0 {
        return f64::NEG_INFINITY * c.signum();
    }
    -c * (d - 2.0) / r2
}

/// Divergence at a node sitting on the origin, mollified at level `h`.
pub(super) fn singular_node_divergence(c: f64, d: usize, h: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    if d == 2 {
        // −2πc δ spread over one cell
        -2.0 * PI * c / (h * h)
    } else {
        -c * (d as f64 - 2.0) * bump_moment(d, 2.0) / (h * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let b = DriftField::radial(1.0, 3);
        let mut out = [0.0; 3];
        b.eval(0.0, &[1.0, 0.0, 0.0], &mut out);
        assert_eq!(out, [-1.0, 0.0, 0.0]);
        assert_eq!(b.divergence(0.0, &[1.0, 0.0, 0.0]), Some(-1.0));

        let b = DriftField::radial(2.0, 3);
        b.eval(0.0, &[0.0, 2.0, 0.0], &mut out);
        // −c x/|x|² = −2 (0,2,0)/4
        assert_eq!(out.map(|v| v + 0.0), [0.0, -1.0, 0.0]);
        assert_eq!(b.divergence(0.0, &[0.0, 2.0, 0.0]), Some(-0.5));
    }

    #[test]
    fn zero_strength_is_zero_field() {
        let b = DriftField::radial(0.0, 3);
        let mut out = [1.0; 3];
        b.eval(0.0, &[0.3, -0.2, 0.1], &mut out);
        assert_eq!(out, [0.0; 3]);
        assert_eq!(b.divergence(0.0, &[0.3, -0.2, 0.1]), Some(0.0));
    }

    #[test]
    fn divergence_matches_central_differences() {
        let b = DriftField::radial(2.0, 3);
        let x = [0.0, 2.0, 0.0];
        let e = 1e-5;
        let mut fd = 0.0;
        let mut p = [0.0; 3];
        let mut m = [0.0; 3];
        for a in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += e;
            xm[a] -= e;
            b.eval(0.0, &xp, &mut p);
            b.eval(0.0, &xm, &mut m);
            fd += (p[a] - m[a]) / (2.0 * e);
        }
        assert!((fd + 0.5).abs() < 1e-8);
    }
}
