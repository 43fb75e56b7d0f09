//! Monotone-chain convex hull and the point-in-hull test used to mask
//! extrapolated cells of bivariate partial dependence surfaces.

pub type Point = (f64, f64);

const TOL: f64 = 1e-9;

#[inline]
fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

#[inline]
fn norm(a: Point, b: Point) -> f64 {
    (b.0 - a.0).hypot(b.1 - a.1)
}

/// Cross-product tolerance, relative to the lengths involved once they
/// exceed unit scale.
#[inline]
fn tol(o: Point, a: Point, p: Point) -> f64 {
    TOL * (norm(o, a) * norm(o, p)).max(1.0)
}

/// Convex hull in counter-clockwise order without collinear points.
/// Degenerate inputs give a single point or the two ends of a segment.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 && lower[0] == lower[1] {
        lower.truncate(1);
    }
    lower
}

/// True when `pt` lies inside or on the boundary of `hull`.
pub fn point_in_hull(pt: Point, hull: &[Point]) -> bool {
    match hull.len() {
        0 => false,
        1 => norm(hull[0], pt) <= TOL * norm((0.0, 0.0), pt).max(1.0),
        2 => {
            let (a, b) = (hull[0], hull[1]);
            if cross(a, b, pt).abs() > tol(a, b, pt) {
                return false;
            }
            let len2 = (b.0 - a.0).powi(2) + (b.1 - a.1).powi(2);
            let t = ((pt.0 - a.0) * (b.0 - a.0) + (pt.1 - a.1) * (b.1 - a.1)) / len2;
            let slack = TOL * (1.0 / len2.sqrt()).max(1.0);
            (-slack..=1.0 + slack).contains(&t)
        }
        n => (0..n).all(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % n]);
            cross(a, b, pt) >= -tol(a, b, pt)
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: [Point; 4] = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];

    #[test]
    fn square_hull() {
        let mut pts = SQUARE.to_vec();
        pts.push((0.5, 0.5));
        pts.push((0.5, 0.0));
        let h = convex_hull(&pts);
        assert_eq!(h, vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert!(point_in_hull((0.5, 0.5), &h));
        assert!(point_in_hull((1.0, 0.5), &h));
        assert!(!point_in_hull((2.0, 2.0), &h));
        assert!(!point_in_hull((-1e-6, 0.5), &h));
    }

    #[test]
    fn segment_hull() {
        let h = convex_hull(&[(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]);
        assert_eq!(h, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert!(point_in_hull((0.3, 0.3), &h));
        assert!(point_in_hull((1.0, 1.0), &h));
        assert!(!point_in_hull((0.0, 1.0), &h));
        assert!(!point_in_hull((1.5, 1.5), &h));
    }

    #[test]
    fn point_hull() {
        let h = convex_hull(&[(2.0, 3.0), (2.0, 3.0)]);
        assert_eq!(h, vec![(2.0, 3.0)]);
        assert!(point_in_hull((2.0, 3.0), &h));
        assert!(!point_in_hull((2.0, 3.1), &h));
    }
}
