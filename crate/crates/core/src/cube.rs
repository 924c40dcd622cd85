//! Cube geometry, point addressing and window enumeration.
//!
//! Points are addressed slice-major: all lines of slice 0 come first, each
//! line holding `points_per_line` consecutive points. The same ordering is
//! used by the on-disk run format, so a point's linear index is also its
//! payload offset in floats.

use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

/// Dimensions of the simulated cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CubeGeometry {
    points_per_line: usize,
    lines_per_slice: usize,
    slice_count: usize,
}

impl CubeGeometry {
    pub fn new(points_per_line: usize, lines_per_slice: usize, slice_count: usize) -> Result<Self> {
        if points_per_line == 0 || lines_per_slice == 0 || slice_count == 0 {
            return Err(Error::InvalidGeometry(format!(
                "all dimensions must be >= 1, got {points_per_line}x{lines_per_slice}x{slice_count}"
            )));
        }
        points_per_line
            .checked_mul(lines_per_slice)
            .and_then(|n| n.checked_mul(slice_count))
            .ok_or_else(|| Error::InvalidGeometry("point count overflows".into()))?;
        Ok(Self {
            points_per_line,
            lines_per_slice,
            slice_count,
        })
    }

    pub fn points_per_line(&self) -> usize {
        self.points_per_line
    }

    pub fn lines_per_slice(&self) -> usize {
        self.lines_per_slice
    }

    pub fn slice_count(&self) -> usize {
        self.slice_count
    }

    /// Points in one slice (`N`).
    pub fn points_per_slice(&self) -> usize {
        self.points_per_line * self.lines_per_slice
    }

    pub fn total_points(&self) -> usize {
        self.points_per_slice() * self.slice_count
    }

    pub fn point_id(&self, x: usize, y: usize, z: usize) -> Result<PointId> {
        check_axis("x", x, self.points_per_line)?;
        check_axis("y", y, self.lines_per_slice)?;
        check_axis("z", z, self.slice_count)?;
        Ok(PointId(
            ((z * self.lines_per_slice + y) * self.points_per_line + x) as u64,
        ))
    }

    /// Inverse of [`point_id`](Self::point_id).
    pub fn coords(&self, id: PointId) -> Result<(usize, usize, usize)> {
        let idx = id.index();
        if idx >= self.total_points() {
            return Err(Error::OutOfBounds {
                axis: "linear index",
                value: idx,
                limit: self.total_points(),
            });
        }
        let x = idx % self.points_per_line;
        let rest = idx / self.points_per_line;
        Ok((x, rest % self.lines_per_slice, rest / self.lines_per_slice))
    }

    pub fn check_slice(&self, slice_index: usize) -> Result<()> {
        check_axis("z", slice_index, self.slice_count)
    }

    /// Linear ids of every point in a slice, in ascending order.
    pub fn slice_ids(&self, slice_index: usize) -> Result<Range<u64>> {
        self.check_slice(slice_index)?;
        let n = self.points_per_slice() as u64;
        let start = slice_index as u64 * n;
        Ok(start..start + n)
    }

    /// Splits a slice into disjoint windows of `lines_per_window` lines, the
    /// last one truncated when the line count is not a multiple.
    pub fn windows_for_slice(
        &self,
        slice_index: usize,
        lines_per_window: usize,
    ) -> Result<Vec<WindowSpec>> {
        self.check_slice(slice_index)?;
        if lines_per_window == 0 {
            return Err(Error::InvalidArgument("lines_per_window must be >= 1".into()));
        }
        Ok((0..self.lines_per_slice)
            .step_by(lines_per_window)
            .map(|first_line| WindowSpec {
                slice_index,
                first_line,
                line_count: lines_per_window.min(self.lines_per_slice - first_line),
            })
            .collect())
    }
}

fn check_axis(axis: &'static str, value: usize, limit: usize) -> Result<()> {
    if value >= limit {
        Err(Error::OutOfBounds { axis, value, limit })
    } else {
        Ok(())
    }
}

/// Linear index of a point in the cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(pub u64);

impl PointId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A contiguous block of lines within one slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub slice_index: usize,
    pub first_line: usize,
    pub line_count: usize,
}

impl WindowSpec {
    pub fn lines(&self) -> Range<usize> {
        self.first_line..self.first_line + self.line_count
    }

    /// Point ids covered by the window. Lines of a slice are contiguous in the
    /// linear ordering, so this is a single range.
    pub fn point_ids(&self, geom: &CubeGeometry) -> Result<Range<u64>> {
        geom.check_slice(self.slice_index)?;
        if self.line_count == 0 || self.first_line + self.line_count > geom.lines_per_slice() {
            return Err(Error::InvalidArgument(format!(
                "window lines {}..{} outside slice of {} lines",
                self.first_line,
                self.first_line + self.line_count,
                geom.lines_per_slice()
            )));
        }
        let start = geom.point_id(0, self.first_line, self.slice_index)?.0;
        Ok(start..start + (self.line_count * geom.points_per_line()) as u64)
    }

    pub fn point_count(&self, geom: &CubeGeometry) -> usize {
        self.line_count * geom.points_per_line()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_size_geom() -> CubeGeometry {
        CubeGeometry::new(251, 501, 501).unwrap()
    }

    #[test]
    fn origin_and_neighbor() {
        let g = full_size_geom();
        assert_eq!(g.point_id(0, 0, 0).unwrap(), PointId(0));
        assert_eq!(g.point_id(1, 0, 0).unwrap(), PointId(1));
        assert_eq!(g.point_id(0, 1, 0).unwrap(), PointId(251));
        assert_eq!(g.point_id(0, 0, 1).unwrap(), PointId(251 * 501));
    }

    #[test]
    fn exhaustive_round_trip_small_cube() {
        let g = CubeGeometry::new(4, 4, 4).unwrap();
        let mut seen = vec![false; 64];
        for z in 0..4 {
            for y in 0..4 {
                for x in 0..4 {
                    let id = g.point_id(x, y, z).unwrap();
                    assert!(!seen[id.index()]);
                    seen[id.index()] = true;
                    assert_eq!(g.coords(id).unwrap(), (x, y, z));
                }
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn out_of_bounds_names_axis() {
        let g = CubeGeometry::new(4, 5, 6).unwrap();
        match g.point_id(0, 5, 0) {
            Err(Error::OutOfBounds { axis, .. }) => assert_eq!(axis, "y"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            g.point_id(0, 0, 6),
            Err(Error::OutOfBounds { axis: "z", .. })
        ));
        assert!(g.coords(PointId(120)).is_err());
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(CubeGeometry::new(0, 1, 1).is_err());
        assert!(CubeGeometry::new(1, 0, 1).is_err());
        assert!(CubeGeometry::new(1, 1, 0).is_err());
    }

    #[test]
    fn windows_with_truncation() {
        let g = full_size_geom();
        let w = g.windows_for_slice(0, 25).unwrap();
        assert_eq!(w.len(), 21);
        assert!(w[..20].iter().all(|w| w.line_count == 25));
        assert_eq!(w[20].line_count, 1);
        assert_eq!(w[20].first_line, 500);

        let g6 = CubeGeometry::new(10, 6, 1).unwrap();
        let w = g6.windows_for_slice(0, 3).unwrap();
        assert_eq!(w.len(), 2);
        assert!(w.iter().all(|w| w.line_count == 3));

        let g5 = CubeGeometry::new(10, 5, 1).unwrap();
        let w = g5.windows_for_slice(0, 7).unwrap();
        assert_eq!(w, vec![WindowSpec { slice_index: 0, first_line: 0, line_count: 5 }]);
    }

    #[test]
    fn window_point_ids_are_contiguous() {
        let g = CubeGeometry::new(501, 6, 2).unwrap();
        let w = g.windows_for_slice(1, 3).unwrap();
        let r = w[1].point_ids(&g).unwrap();
        assert_eq!(r.end - r.start, 1503);
        assert_eq!(r.start, g.point_id(0, 3, 1).unwrap().0);
        assert!(g.windows_for_slice(2, 3).is_err());
        assert!(g.windows_for_slice(0, 0).is_err());
    }
}
