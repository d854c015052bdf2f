//! Implicit planar regions.
//!
//! A [`Region2D`] is an expression tree over a handful of analytic
//! primitives, combined with boolean operators. Regions stay predicates
//! all the way to meshing; nothing here turns them into polygons.
//!
//! The text grammar understood by [`parse`]:
//!
//! ```text
//! expr     := or
//! or       := and ('||' and)*
//! and      := unary ('&&' unary)*
//! unary    := '!' unary | '(' expr ')' | call
//! call     := ident '(' number (',' number)* ')'
//! ```
//!
//! Primitives: `disk(cx,cy,r)` (strict interior), `closed_disk(cx,cy,r)`,
//! `halfplane(a,b,c)` for `a x + b y <= c`, `cheby_band(kx,ky,c)` for
//! `max(kx |x|, ky |y|) > c`, and `rect(x0,x1,y0,y1)` (closed).

mod parse;

pub use parse::parse;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Region2D {
    /// Strict interior of a circle: `(x-cx)^2 + (y-cy)^2 < r^2`.
    Disk { cx: f64, cy: f64, r: f64 },
    /// Closed disk: `(x-cx)^2 + (y-cy)^2 <= r^2`. Negate to carve a hole
    /// whose boundary is excluded.
    ClosedDisk { cx: f64, cy: f64, r: f64 },
    /// `a x + b y <= c`.
    HalfPlane { a: f64, b: f64, c: f64 },
    /// `max(kx |x|, ky |y|) > c`: everything outside an axis-aligned box,
    /// with per-axis coefficients.
    ChebyBand { kx: f64, ky: f64, c: f64 },
    /// Closed axis-aligned rectangle.
    Rect { x0: f64, x1: f64, y0: f64, y1: f64 },
    And(Box<Region2D>, Box<Region2D>),
    Or(Box<Region2D>, Box<Region2D>),
    Not(Box<Region2D>),
}

/// Conservative axis-aligned bound for a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundingBox {
    /// The region is provably empty.
    Empty,
    /// `[x0, x1] x [y0, y1]` contains the region (possibly degenerate).
    Bounded { x0: f64, x1: f64, y0: f64, y1: f64 },
    /// No finite bound can be derived.
    Unbounded,
}

impl Region2D {
    pub fn disk(cx: f64, cy: f64, r: f64) -> Result<Self> {
        check_radius(r)?;
        check_finite(&[cx, cy])?;
        Ok(Region2D::Disk { cx, cy, r })
    }

    pub fn closed_disk(cx: f64, cy: f64, r: f64) -> Result<Self> {
        check_radius(r)?;
        check_finite(&[cx, cy])?;
        Ok(Region2D::ClosedDisk { cx, cy, r })
    }

    pub fn halfplane(a: f64, b: f64, c: f64) -> Result<Self> {
        check_finite(&[a, b, c])?;
        Ok(Region2D::HalfPlane { a, b, c })
    }

    pub fn cheby_band(kx: f64, ky: f64, c: f64) -> Result<Self> {
        check_finite(&[kx, ky, c])?;
        if kx < 0.0 || ky < 0.0 || (kx == 0.0 && ky == 0.0) {
            return Err(Error::invalid(
                "region",
                format!("cheby_band coefficients ({kx}, {ky}) must be >= 0 and not both 0"),
            ));
        }
        Ok(Region2D::ChebyBand { kx, ky, c })
    }

    pub fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        check_finite(&[x0, x1, y0, y1])?;
        if x0 >= x1 || y0 >= y1 {
            return Err(Error::invalid(
                "region",
                format!("rect({x0},{x1},{y0},{y1}) must satisfy x0 < x1 and y0 < y1"),
            ));
        }
        Ok(Region2D::Rect { x0, x1, y0, y1 })
    }

    pub fn and(self, other: Region2D) -> Region2D {
        Region2D::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Region2D) -> Region2D {
        Region2D::Or(Box::new(self), Box::new(other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Region2D {
        Region2D::Not(Box::new(self))
    }

    /// Exact predicate evaluation at a point.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            Region2D::Disk { cx, cy, r } => {
                let dx = x - cx;
                let dy = y - cy;
                dx * dx + dy * dy < r * r
            }
            Region2D::ClosedDisk { cx, cy, r } => {
                let dx = x - cx;
                let dy = y - cy;
                dx * dx + dy * dy <= r * r
            }
            Region2D::HalfPlane { a, b, c } => a * x + b * y <= *c,
            Region2D::ChebyBand { kx, ky, c } => (kx * x.abs()).max(ky * y.abs()) > *c,
            Region2D::Rect { x0, x1, y0, y1 } => x >= *x0 && x <= *x1 && y >= *y0 && y <= *y1,
            Region2D::And(l, r) => l.contains(x, y) && r.contains(x, y),
            Region2D::Or(l, r) => l.contains(x, y) || r.contains(x, y),
            Region2D::Not(inner) => !inner.contains(x, y),
        }
    }

    /// Conservative superset box. `And` intersects child boxes, `Or`
    /// takes the hull, `Not` gives up.
    pub fn bounding_box(&self) -> BoundingBox {
        match self {
            Region2D::Disk { cx, cy, r } | Region2D::ClosedDisk { cx, cy, r } => {
                BoundingBox::Bounded {
                    x0: cx - r,
                    x1: cx + r,
                    y0: cy - r,
                    y1: cy + r,
                }
            }
            Region2D::HalfPlane { .. } | Region2D::ChebyBand { .. } | Region2D::Not(_) => {
                BoundingBox::Unbounded
            }
            Region2D::Rect { x0, x1, y0, y1 } => BoundingBox::Bounded {
                x0: *x0,
                x1: *x1,
                y0: *y0,
                y1: *y1,
            },
            Region2D::And(l, r) => match (l.bounding_box(), r.bounding_box()) {
                (BoundingBox::Empty, _) | (_, BoundingBox::Empty) => BoundingBox::Empty,
                (BoundingBox::Unbounded, b) | (b, BoundingBox::Unbounded) => b,
                (
                    BoundingBox::Bounded { x0, x1, y0, y1 },
                    BoundingBox::Bounded {
                        x0: a0,
                        x1: a1,
                        y0: b0,
                        y1: b1,
                    },
                ) => {
                    let (x0, x1) = (x0.max(a0), x1.min(a1));
                    let (y0, y1) = (y0.max(b0), y1.min(b1));
                    if x0 > x1 || y0 > y1 {
                        BoundingBox::Empty
                    } else {
                        BoundingBox::Bounded { x0, x1, y0, y1 }
                    }
                }
            },
            Region2D::Or(l, r) => match (l.bounding_box(), r.bounding_box()) {
                (BoundingBox::Unbounded, _) | (_, BoundingBox::Unbounded) => {
                    BoundingBox::Unbounded
                }
                (BoundingBox::Empty, b) | (b, BoundingBox::Empty) => b,
                (
                    BoundingBox::Bounded { x0, x1, y0, y1 },
                    BoundingBox::Bounded {
                        x0: a0,
                        x1: a1,
                        y0: b0,
                        y1: b1,
                    },
                ) => BoundingBox::Bounded {
                    x0: x0.min(a0),
                    x1: x1.max(a1),
                    y0: y0.min(b0),
                    y1: y1.max(b1),
                },
            },
        }
    }

    /// Canonical text form; [`parse`] of the output reproduces the tree.
    pub fn pretty_print(&self) -> String {
        fn num(v: f64) -> String {
            format!("{v}")
        }
        fn go(region: &Region2D, out: &mut String) {
            match region {
                Region2D::Disk { cx, cy, r } => {
                    out.push_str(&format!("disk({},{},{})", num(*cx), num(*cy), num(*r)));
                }
                Region2D::ClosedDisk { cx, cy, r } => {
                    out.push_str(&format!(
                        "closed_disk({},{},{})",
                        num(*cx),
                        num(*cy),
                        num(*r)
                    ));
                }
                Region2D::HalfPlane { a, b, c } => {
                    out.push_str(&format!("halfplane({},{},{})", num(*a), num(*b), num(*c)));
                }
                Region2D::ChebyBand { kx, ky, c } => {
                    out.push_str(&format!(
                        "cheby_band({},{},{})",
                        num(*kx),
                        num(*ky),
                        num(*c)
                    ));
                }
                Region2D::Rect { x0, x1, y0, y1 } => {
                    out.push_str(&format!(
                        "rect({},{},{},{})",
                        num(*x0),
                        num(*x1),
                        num(*y0),
                        num(*y1)
                    ));
                }
                Region2D::And(l, r) => {
                    wrap_if(l, matches!(**l, Region2D::Or(..)), out);
                    out.push_str(" && ");
                    wrap_if(r, matches!(**r, Region2D::Or(..) | Region2D::And(..)), out);
                }
                Region2D::Or(l, r) => {
                    go(l, out);
                    out.push_str(" || ");
                    wrap_if(r, matches!(**r, Region2D::Or(..)), out);
                }
                Region2D::Not(inner) => {
                    out.push('!');
                    wrap_if(inner, matches!(**inner, Region2D::And(..) | Region2D::Or(..)), out);
                }
            }
        }
        fn wrap_if(region: &Region2D, wrap: bool, out: &mut String) {
            if wrap {
                out.push('(');
                go(region, out);
                out.push(')');
            } else {
                go(region, out);
            }
        }
        let mut out = String::new();
        go(self, &mut out);
        out
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::invalid(
            "region",
            format!("radius {r} must be finite and > 0"),
        ));
    }
    Ok(())
}

fn check_finite(values: &[f64]) -> Result<()> {
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid("region", format!("non-finite value {v}")));
    }
    Ok(())
}
