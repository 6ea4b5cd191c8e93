//! Built-in test domains. All coordinates are dyadic, all features are
//! axis-aligned or at 45 degrees, so every geometric predicate in [`crate::geom`]
//! evaluates exactly on them.

use crate::geom::{Point, PolygonalDomain};

fn ring(pts: &[(f64, f64)]) -> Vec<Point> {
    pts.iter().map(|&(x, y)| Point::new(x, y)).collect()
}

/// The open unit square `(0,1)^2`.
pub fn unit_square() -> PolygonalDomain {
    PolygonalDomain::new(
        ring(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]),
        vec![],
        vec![],
    )
    .expect("unit square is valid")
}

/// The slit square `(-1,1)^2` minus the segment `[(-1/2,0),(1/2,0)]`.
/// Interior slit points split in two; the slit tips do not split.
pub fn slit_square() -> PolygonalDomain {
    PolygonalDomain::new(
        ring(&[(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]),
        vec![],
        vec![ring(&[(-0.5, 0.0), (0.5, 0.0)])],
    )
    .expect("slit square is valid")
}

/// Six slits meeting at the origin inside `(-1,1)^2`. The origin splits into
/// six elements, one per angular sector between consecutive slits.
pub fn hub() -> PolygonalDomain {
    let spokes = [
        (0.5, 0.0),
        (0.5, 0.5),
        (0.0, 0.5),
        (-0.5, 0.0),
        (-0.5, -0.5),
        (0.0, -0.5),
    ];
    PolygonalDomain::new(
        ring(&[(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]),
        vec![],
        spokes
            .iter()
            .map(|&(x, y)| ring(&[(0.0, 0.0), (x, y)]))
            .collect(),
    )
    .expect("hub is valid")
}

/// A truncated comb in `(0,1)^2`: `teeth` vertical slits at `x = 2^-k`,
/// alternately attached to the bottom and the top edge. Geodesics between
/// cells must zigzag vertically by at least 1/2 per tooth, so path lengths
/// grow linearly with the tooth count; the true infinite comb has an
/// inaccessible segment on the left wall.
pub fn comb(teeth: u32) -> PolygonalDomain {
    let slits = (1..=teeth)
        .map(|k| {
            let x = (0.5f64).powi(k as i32);
            if k % 2 == 1 {
                ring(&[(x, 0.0), (x, 0.75)])
            } else {
                ring(&[(x, 1.0), (x, 0.25)])
            }
        })
        .collect();
    PolygonalDomain::new(
        ring(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]),
        vec![],
        slits,
    )
    .expect("comb is valid")
}

/// The four standard fixtures with stable names.
pub fn all() -> Vec<(&'static str, PolygonalDomain)> {
    vec![
        ("unit_square", unit_square()),
        ("slit_square", slit_square()),
        ("hub", hub()),
        ("comb", comb(6)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_validate() {
        for (name, d) in all() {
            assert!(d.area() > 0.0, "{name} has positive area");
        }
        assert_eq!(slit_square().slits().len(), 1);
        assert_eq!(hub().slits().len(), 6);
        assert_eq!(comb(6).slits().len(), 6);
    }
}
