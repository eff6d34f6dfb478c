//! Random points of a set near a basepoint.

use rand::Rng;

use super::{ProxSmoothSet, CONTAINS_TOL};
use crate::rng::{ball_point, sphere_point};
use crate::vector::Vector;

const REJECTIONS: usize = 100;

/// A point of `set ∩ B(center, radius)`.
///
/// Rejection sampling from the ball (from the whole sphere when the set is
/// the unit sphere), falling back to projecting ball samples after 100
/// rejections. Returns `center` itself if every attempt fails.
pub fn sample_near<R: Rng + ?Sized>(
    set: &ProxSmoothSet,
    center: &[f64],
    radius: f64,
    rng: &mut R,
) -> Vector {
    if let ProxSmoothSet::UnitSphere(_) = set {
        for _ in 0..REJECTIONS {
            let y = sphere_point(rng, center.len());
            if y.dist(center) <= radius {
                return y;
            }
        }
    } else {
        for _ in 0..REJECTIONS {
            let y = ball_point(rng, center, radius);
            if set.contains(&y, 0.0) {
                return y;
            }
        }
    }
    // Projections of points within distance r of the set land within 2r of
    // `center`, and stay inside the sphere's projection tube when r < 1.
    let r = if let ProxSmoothSet::UnitSphere(_) = set {
        radius.min(0.99)
    } else {
        radius
    };
    for _ in 0..REJECTIONS {
        let y = ball_point(rng, center, r);
        if let Ok(p) = set.project(&y) {
            if p.dist(center) <= radius && set.contains(&p, CONTAINS_TOL) {
                return p;
            }
        }
    }
    Vector::from(center)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    #[test]
    fn samples_lie_in_set_and_ball() {
        let mut rng = CounterRng::new(11).stream(0);
        let sphere = ProxSmoothSet::unit_sphere(3);
        let x = [1.0, 0.0, 0.0];
        for _ in 0..500 {
            let y = sample_near(&sphere, &x, 0.3, &mut rng);
            assert!(sphere.contains(&y, 1e-12));
            assert!(y.dist(&x) <= 0.3);
        }
        let interval = ProxSmoothSet::interval(-2.0, 2.0).unwrap();
        for _ in 0..500 {
            let y = sample_near(&interval, &[2.0], 1.0, &mut rng);
            assert!(y[0] >= 1.0 && y[0] <= 2.0);
        }
    }
}
