//! Axis-aligned boxes, planar point transforms, IOU and center distance.
//!
//! Coordinates are continuous with a top-left origin and `y` growing
//! downward. Pixel `(row i, col j)` covers the unit square `[j, j+1) x [i, i+1)`,
//! so boxes with integer corners measure areas in whole pixels.

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(
        "invalid box ({x1}, {y1}, {x2}, {y2}): corners must be finite with x1 <= x2 and y1 <= y2"
    )]
    InvalidBox { x1: f64, y1: f64, x2: f64, y2: f64 },
    #[error("transform matrix has a non-finite entry")]
    NonFinite,
    #[error("projective matrix is singular (|det| = {det:e})")]
    Singular { det: f64 },
    #[error("point ({x}, {y}) is mapped to the plane at infinity")]
    DegenerateWarp { x: f64, y: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Axis-aligned rectangle `[x1, x2] x [y1, y2]` in page pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundingBox<T> {
    x1: T,
    y1: T,
    x2: T,
    y2: T,
}

impl<T: Scalar> BoundingBox<T> {
    pub fn new(x1: T, y1: T, x2: T, y2: T) -> Result<Self, GeometryError> {
        let finite = x1.is_finite() && y1.is_finite() && x2.is_finite() && y2.is_finite();
        if !finite || x1 > x2 || y1 > y2 {
            return Err(GeometryError::InvalidBox {
                x1: x1.to_f64_lossy(),
                y1: y1.to_f64_lossy(),
                x2: x2.to_f64_lossy(),
                y2: y2.to_f64_lossy(),
            });
        }
        Ok(Self { x1, y1, x2, y2 })
    }

    /// Box from a top-left corner and a size, as annotation tools record them.
    pub fn from_xywh(x: T, y: T, width: T, height: T) -> Result<Self, GeometryError> {
        Self::new(x, y, x + width, y + height)
    }

    /// Smallest box containing every point. `None` for an empty slice or
    /// any non-finite point.
    pub fn envelope(points: &[Point2<T>]) -> Option<Self> {
        let first = points.first()?;
        let mut out = Self {
            x1: first.x,
            y1: first.y,
            x2: first.x,
            y2: first.y,
        };
        for p in points {
            if !p.is_finite() {
                return None;
            }
            out.x1 = out.x1.min(p.x);
            out.y1 = out.y1.min(p.y);
            out.x2 = out.x2.max(p.x);
            out.y2 = out.y2.max(p.y);
        }
        Some(out)
    }

    pub fn x1(&self) -> T {
        self.x1
    }
    pub fn y1(&self) -> T {
        self.y1
    }
    pub fn x2(&self) -> T {
        self.x2
    }
    pub fn y2(&self) -> T {
        self.y2
    }

    pub fn width(&self) -> T {
        self.x2 - self.x1
    }

    pub fn height(&self) -> T {
        self.y2 - self.y1
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point2<T> {
        let two = T::lit(2.0);
        Point2::new((self.x1 + self.x2) / two, (self.y1 + self.y2) / two)
    }

    /// Corners in the order top-left, top-right, bottom-right, bottom-left.
    pub fn corners(&self) -> [Point2<T>; 4] {
        [
            Point2::new(self.x1, self.y1),
            Point2::new(self.x2, self.y1),
            Point2::new(self.x2, self.y2),
            Point2::new(self.x1, self.y2),
        ]
    }

    pub fn contains_point(&self, p: Point2<T>) -> bool {
        p.x >= self.x1 && p.x <= self.x2 && p.y >= self.y1 && p.y <= self.y2
    }

    pub fn contains_box(&self, other: &Self) -> bool {
        other.x1 >= self.x1 && other.x2 <= self.x2 && other.y1 >= self.y1 && other.y2 <= self.y2
    }

    pub fn intersection_area(&self, other: &Self) -> T {
        let w = (self.x2.min(other.x2) - self.x1.max(other.x1)).max(T::zero());
        let h = (self.y2.min(other.y2) - self.y1.max(other.y1)).max(T::zero());
        w * h
    }

    /// Envelope of both boxes.
    pub fn union_envelope(&self, other: &Self) -> Self {
        Self {
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
            x2: self.x2.max(other.x2),
            y2: self.y2.max(other.y2),
        }
    }

    /// Clips to `[0, width] x [0, height]`. `None` when nothing of the box
    /// remains inside the frame.
    pub fn clip(&self, width: T, height: T) -> Option<Self> {
        let x1 = self.x1.max(T::zero());
        let y1 = self.y1.max(T::zero());
        let x2 = self.x2.min(width);
        let y2 = self.y2.min(height);
        if x1 > x2 || y1 > y2 {
            return None;
        }
        Some(Self { x1, y1, x2, y2 })
    }

    /// Shrinks every edge inward by `amount`, collapsing onto the center
    /// line when the box is too thin.
    pub fn inset(&self, amount: T) -> Self {
        let two = T::lit(2.0);
        let c = self.center();
        let (x1, x2) = if self.width() >= two * amount {
            (self.x1 + amount, self.x2 - amount)
        } else {
            (c.x, c.x)
        };
        let (y1, y2) = if self.height() >= two * amount {
            (self.y1 + amount, self.y2 - amount)
        } else {
            (c.y, c.y)
        };
        Self { x1, y1, x2, y2 }
    }

    pub fn cast<U: Scalar>(&self) -> BoundingBox<U> {
        BoundingBox {
            x1: U::lit(self.x1.to_f64_lossy()),
            y1: U::lit(self.y1.to_f64_lossy()),
            x2: U::lit(self.x2.to_f64_lossy()),
            y2: U::lit(self.y2.to_f64_lossy()),
        }
    }
}

/// Intersection over union. Zero when the union has no area.
pub fn iou<T: Scalar>(a: &BoundingBox<T>, b: &BoundingBox<T>) -> T {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union <= T::zero() {
        return T::zero();
    }
    (inter / union).min(T::one()).max(T::zero())
}

/// Euclidean distance between box centers.
pub fn center_distance<T: Scalar>(a: &BoundingBox<T>, b: &BoundingBox<T>) -> T {
    a.center().distance(&b.center())
}

/// Anything that maps plane points to plane points.
pub trait PointTransform<T> {
    fn map_point(&self, p: Point2<T>) -> Result<Point2<T>, GeometryError>;
}

/// 2x3 affine matrix acting on column vectors `(x, y, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Affine2<T> {
    m: [[T; 3]; 2],
}

impl<T: Scalar> Affine2<T> {
    pub fn from_matrix(m: [[T; 3]; 2]) -> Result<Self, GeometryError> {
        if m.iter().flatten().all(|v| v.is_finite()) {
            Ok(Self { m })
        } else {
            Err(GeometryError::NonFinite)
        }
    }

    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self {
            m: [[o, z, z], [z, o, z]],
        }
    }

    pub fn translation(dx: T, dy: T) -> Self {
        let (o, z) = (T::one(), T::zero());
        Self {
            m: [[o, z, dx], [z, o, dy]],
        }
    }

    /// Rotation by `degrees` about `center`. Positive angles turn the page
    /// counter-clockwise as displayed: on a 100x100 page, `+90` sends
    /// `(x, y)` to `(y, 100 - x)`.
    pub fn rotation_about(center: Point2<T>, degrees: T) -> Self {
        let (s, c) = degrees.to_radians().sin_cos();
        // x' = cx + c*(x-cx) + s*(y-cy); y' = cy - s*(x-cx) + c*(y-cy)
        let tx = center.x - c * center.x - s * center.y;
        let ty = center.y + s * center.x - c * center.y;
        Self {
            m: [[c, s, tx], [-s, c, ty]],
        }
    }

    pub fn matrix(&self) -> [[T; 3]; 2] {
        self.m
    }

    pub fn determinant(&self) -> T {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn apply(&self, p: Point2<T>) -> Point2<T> {
        let m = &self.m;
        Point2::new(
            m[0][0] * p.x + m[0][1] * p.y + m[0][2],
            m[1][0] * p.x + m[1][1] * p.y + m[1][2],
        )
    }

    pub fn inverse(&self) -> Result<Self, GeometryError> {
        let det = self.determinant();
        if det.abs() <= T::lit(1e-12) {
            return Err(GeometryError::Singular {
                det: det.to_f64_lossy(),
            });
        }
        let m = &self.m;
        let a = m[1][1] / det;
        let b = -m[0][1] / det;
        let c = -m[1][0] / det;
        let d = m[0][0] / det;
        Ok(Self {
            m: [
                [a, b, -(a * m[0][2] + b * m[1][2])],
                [c, d, -(c * m[0][2] + d * m[1][2])],
            ],
        })
    }

    pub fn to_projective(&self) -> Projective2<T> {
        let (o, z) = (T::one(), T::zero());
        Projective2 {
            m: [self.m[0], self.m[1], [z, z, o]],
        }
    }
}

impl<T: Scalar> PointTransform<T> for Affine2<T> {
    fn map_point(&self, p: Point2<T>) -> Result<Point2<T>, GeometryError> {
        Ok(self.apply(p))
    }
}

/// 3x3 homography with the bottom-right entry normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Projective2<T> {
    m: [[T; 3]; 3],
}

impl<T: Scalar> Projective2<T> {
    pub fn from_matrix(m: [[T; 3]; 3]) -> Result<Self, GeometryError> {
        if !m.iter().flatten().all(|v| v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let scale = m[2][2];
        if scale.abs() <= T::lit(1e-12) {
            return Err(GeometryError::Singular {
                det: det3(&m).to_f64_lossy(),
            });
        }
        let mut n = m;
        for row in n.iter_mut() {
            for v in row.iter_mut() {
                *v = *v / scale;
            }
        }
        let det = det3(&n);
        if det.abs() <= T::lit(1e-12) || !det.is_finite() {
            return Err(GeometryError::Singular {
                det: det.to_f64_lossy(),
            });
        }
        Ok(Self { m: n })
    }

    pub fn identity() -> Self {
        Affine2::identity().to_projective()
    }

    /// Homography sending `src[i]` to `dst[i]` for the four correspondences.
    pub fn from_correspondences(
        src: &[Point2<T>; 4],
        dst: &[Point2<T>; 4],
    ) -> Result<Self, GeometryError> {
        // h = (h00 h01 h02 h10 h11 h12 h20 h21), h22 = 1
        let mut a = [[T::zero(); 9]; 8];
        for i in 0..4 {
            let (x, y) = (src[i].x, src[i].y);
            let (u, v) = (dst[i].x, dst[i].y);
            let o = T::one();
            let z = T::zero();
            a[2 * i] = [x, y, o, z, z, z, -x * u, -y * u, u];
            a[2 * i + 1] = [z, z, z, x, y, o, -x * v, -y * v, v];
        }
        let h = solve_augmented(a).ok_or(GeometryError::Singular { det: 0.0 })?;
        Self::from_matrix([
            [h[0], h[1], h[2]],
            [h[3], h[4], h[5]],
            [h[6], h[7], T::one()],
        ])
    }

    pub fn matrix(&self) -> [[T; 3]; 3] {
        self.m
    }

    pub fn determinant(&self) -> T {
        det3(&self.m)
    }

    pub fn inverse(&self) -> Result<Self, GeometryError> {
        let m = &self.m;
        let det = det3(m);
        if det.abs() <= T::lit(1e-12) {
            return Err(GeometryError::Singular {
                det: det.to_f64_lossy(),
            });
        }
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
            m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
        };
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        let mut inv = adj;
        for row in inv.iter_mut() {
            for v in row.iter_mut() {
                *v = *v / det;
            }
        }
        Self::from_matrix(inv)
    }

    /// Maps a point, returning the homogeneous weight alongside it. Callers
    /// resampling whole images use the weight sign to reject points behind
    /// the horizon.
    pub fn apply_homogeneous(&self, p: Point2<T>) -> (Point2<T>, T) {
        let m = &self.m;
        let w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
        let x = m[0][0] * p.x + m[0][1] * p.y + m[0][2];
        let y = m[1][0] * p.x + m[1][1] * p.y + m[1][2];
        (Point2::new(x / w, y / w), w)
    }
}

impl<T: Scalar> PointTransform<T> for Projective2<T> {
    fn map_point(&self, p: Point2<T>) -> Result<Point2<T>, GeometryError> {
        let (q, w) = self.apply_homogeneous(p);
        if w.abs() <= T::lit(1e-12) || !q.is_finite() {
            return Err(GeometryError::DegenerateWarp {
                x: p.x.to_f64_lossy(),
                y: p.y.to_f64_lossy(),
            });
        }
        Ok(q)
    }
}

/// Maps the four corners of `b` through `t` and returns their envelope.
pub fn transform_box<T, Tr>(t: &Tr, b: &BoundingBox<T>) -> Result<BoundingBox<T>, GeometryError>
where
    T: Scalar,
    Tr: PointTransform<T> + ?Sized,
{
    let mut mapped = [Point2::default(); 4];
    for (dst, corner) in mapped.iter_mut().zip(b.corners()) {
        *dst = t.map_point(corner)?;
    }
    BoundingBox::envelope(&mapped).ok_or(GeometryError::DegenerateWarp {
        x: b.x1.to_f64_lossy(),
        y: b.y1.to_f64_lossy(),
    })
}

fn det3<T: Scalar>(m: &[[T; 3]; 3]) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Gauss-Jordan elimination with partial pivoting on an 8x9 augmented system.
fn solve_augmented<T: Scalar>(mut a: [[T; 9]; 8]) -> Option<[T; 8]> {
    for col in 0..8 {
        let pivot = (col..8).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() <= T::lit(1e-12) {
            return None;
        }
        a.swap(col, pivot);
        let p = a[col][col];
        for v in a[col].iter_mut() {
            *v = *v / p;
        }
        for row in 0..8 {
            if row != col {
                let f = a[row][col];
                if f != T::zero() {
                    for k in col..9 {
                        let delta = f * a[col][k];
                        a[row][k] = a[row][k] - delta;
                    }
                }
            }
        }
    }
    let mut out = [T::zero(); 8];
    for (i, v) in out.iter_mut().enumerate() {
        *v = a[i][8];
    }
    Some(out)
}
