//! Planar geometry on the area of operation.

use num_traits::Float;
use serde::{Deserialize, Serialize};

/// A position in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Float> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Self) -> T {
        distance(*self, *other)
    }

    /// Clamp both coordinates into `[-half_width, half_width]`.
    pub fn clamp_square(self, half_width: T) -> Self {
        Self::new(
            self.x.max(-half_width).min(half_width),
            self.y.max(-half_width).min(half_width),
        )
    }

    pub fn lerp(self, other: Self, s: T) -> Self {
        Self::new(
            self.x + (other.x - self.x) * s,
            self.y + (other.y - self.y) * s,
        )
    }
}

/// Euclidean distance.
#[inline]
pub fn distance<T: Float>(a: Point2<T>, b: Point2<T>) -> T {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Advance from `from` toward `target` by at most `speed * dt`.
///
/// Returns `target` itself when it is reachable within the step, so repeated
/// calls land exactly on the target instead of oscillating around it.
pub fn move_toward<T: Float>(from: Point2<T>, target: Point2<T>, speed: T, dt: T) -> Point2<T> {
    let step = speed * dt;
    let d = distance(from, target);
    if d <= step {
        return target;
    }
    from.lerp(target, step / d)
}

/// Diameter of the square `[-half_width, half_width]^2`.
pub fn square_diameter<T: Float>(half_width: T) -> T {
    let side = half_width + half_width;
    side * T::from(2.0).unwrap().sqrt()
}

/// Index of the point in `candidates` nearest to `p`; lowest index on ties.
pub fn nearest_index<T: Float>(p: Point2<T>, candidates: &[Point2<T>]) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let d = distance(p, *c);
        match best {
            Some((_, bd)) if d >= bd => {}
            _ => best = Some((i, d)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    type P = Point2<f64>;

    #[test]
    fn distance_examples() {
        assert_eq!(distance(P::new(0.0, 0.0), P::new(0.0, 0.0)), 0.0);
        assert_eq!(distance(P::new(0.0, 0.0), P::new(3.0, 4.0)), 5.0);
        let diam = distance(P::new(-4000.0, -4000.0), P::new(4000.0, 4000.0));
        assert_abs_diff_eq!(diam, 8000.0 * 2f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(diam, 11313.7, epsilon = 0.1);
        assert_abs_diff_eq!(square_diameter(4000.0), diam, epsilon = 1e-9);
    }

    #[test]
    fn move_toward_examples() {
        let o = P::new(0.0, 0.0);
        assert_eq!(move_toward(o, P::new(100.0, 0.0), 20.0, 10.0), P::new(100.0, 0.0));
        assert_eq!(move_toward(o, P::new(1000.0, 0.0), 20.0, 10.0), P::new(200.0, 0.0));
        let p = P::new(12.5, -3.0);
        assert_eq!(move_toward(p, p, 20.0, 10.0), p);
        assert_eq!(move_toward(p, p, 0.0, 1.0), p);
    }

    #[test]
    fn works_for_f32() {
        let a = Point2::<f32>::new(0.0, 0.0);
        assert_eq!(move_toward(a, Point2::new(0.0, 50.0), 2.0, 5.0), Point2::new(0.0, 10.0));
    }

    #[test]
    fn nearest_prefers_lowest_index() {
        let c = [P::new(1.0, 0.0), P::new(-1.0, 0.0), P::new(0.5, 0.0)];
        assert_eq!(nearest_index(P::origin(), &c[..2]), Some(0));
        assert_eq!(nearest_index(P::origin(), &c), Some(2));
        assert_eq!(nearest_index(P::origin(), &[]), None);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn pt() -> impl Strategy<Value = P> {
            (-4000.0..4000.0f64, -4000.0..4000.0f64).prop_map(|(x, y)| P::new(x, y))
        }

        proptest! {
            #[test]
            fn never_overshoots(a in pt(), b in pt(), speed in 0.0..50.0f64, dt in 0.1..20.0f64) {
                let r = move_toward(a, b, speed, dt);
                let expect = (distance(a, b) - speed * dt).max(0.0);
                prop_assert!((distance(r, b) - expect).abs() <= 1e-9 * (1.0 + distance(a, b)));
            }

            #[test]
            fn converges_in_ceil_steps(a in pt(), b in pt(), speed in 1.0..50.0f64, dt in 0.5..20.0f64) {
                let steps = (distance(a, b) / (speed * dt)).ceil() as usize;
                let mut p = a;
                for _ in 0..steps {
                    p = move_toward(p, b, speed, dt);
                }
                prop_assert_eq!(p, b);
            }

            #[test]
            fn distance_symmetric(a in pt(), b in pt()) {
                prop_assert_eq!(distance(a, b), distance(b, a));
                prop_assert_eq!(distance(a, a), 0.0);
            }
        }
    }
}
