use crate::error::{invalid, Result};

/// Identifier of an edge inside a [`LatticeBox`]: `vertex * d + axis`, where
/// `vertex` is the index of the lexicographically smaller endpoint. Sorting by
/// id is the canonical (lexicographic) edge order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

/// Integer box `[l_1, u_1] x ... x [l_d, u_d]` of Z^d.
///
/// Vertices are indexed in mixed radix with the first coordinate most
/// significant, so index order equals lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBox {
    lower: Vec<i64>,
    upper: Vec<i64>,
    strides: Vec<usize>,
    vertex_count: usize,
}

impl LatticeBox {
    pub fn new(lower: Vec<i64>, upper: Vec<i64>) -> Result<Self> {
        let d = lower.len();
        if d == 0 || d != upper.len() {
            return invalid("box bounds must be non-empty and of equal dimension");
        }
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return invalid(format!("empty box: lower {lower:?} upper {upper:?}"));
        }
        let mut strides = vec![1usize; d];
        let mut count: usize = 1;
        for i in (0..d).rev() {
            strides[i] = count;
            let side = usize::try_from(upper[i] - lower[i] + 1)
                .map_err(|_| crate::FppError::InvalidInput("box side overflows".into()))?;
            count = count
                .checked_mul(side)
                .ok_or_else(|| crate::FppError::InvalidInput("box too large".into()))?;
        }
        Ok(Self { lower, upper, strides, vertex_count: count })
    }

    /// `[0, n]^d`.
    pub fn cube(d: usize, n: i64) -> Result<Self> {
        Self::new(vec![0; d], vec![n; d])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[i64] {
        &self.lower
    }

    pub fn upper(&self) -> &[i64] {
        &self.upper
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Number of slots in the edge-indexed arrays (`vertex_count * d`). Some
    /// slots do not correspond to edges; see [`LatticeBox::edge_exists`].
    pub fn edge_slots(&self) -> usize {
        self.vertex_count * self.dim()
    }

    pub fn edge_count(&self) -> usize {
        let d = self.dim();
        (0..d)
            .map(|axis| {
                (0..d)
                    .map(|i| {
                        let side = (self.upper[i] - self.lower[i]) as usize;
                        if i == axis {
                            side
                        } else {
                            side + 1
                        }
                    })
                    .product::<usize>()
            })
            .sum()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| l <= v && v <= u)
    }

    pub fn contains_box(&self, other: &LatticeBox) -> bool {
        self.contains(other.lower()) && self.contains(other.upper())
    }

    /// Real point inside the (closed) box.
    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| *l as f64 <= *v && *v <= *u as f64)
    }

    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        Some(x.iter().zip(&self.lower).zip(&self.strides).map(|((v, l), s)| (v - l) as usize * s).sum())
    }

    pub fn coords_into(&self, mut idx: usize, out: &mut [i64]) {
        for i in 0..self.dim() {
            let q = idx / self.strides[i];
            idx -= q * self.strides[i];
            out[i] = self.lower[i] + q as i64;
        }
    }

    pub fn coords(&self, idx: usize) -> Vec<i64> {
        let mut out = vec![0; self.dim()];
        self.coords_into(idx, &mut out);
        out
    }

    /// Coordinate `axis` of vertex `idx` without allocating.
    #[inline]
    pub fn coord(&self, idx: usize, axis: usize) -> i64 {
        let side = (self.upper[axis] - self.lower[axis] + 1) as usize;
        self.lower[axis] + ((idx / self.strides[axis]) % side) as i64
    }

    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// Neighbour of `idx` one step in direction `+e_axis` (`up = true`) or
    /// `-e_axis`.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, up: bool) -> Option<usize> {
        let c = self.coord(idx, axis);
        if up {
            (c < self.upper[axis]).then(|| idx + self.strides[axis])
        } else {
            (c > self.lower[axis]).then(|| idx - self.strides[axis])
        }
    }

    #[inline]
    pub fn edge_id(&self, lower_vertex: usize, axis: usize) -> EdgeId {
        EdgeId(lower_vertex * self.dim() + axis)
    }

    #[inline]
    pub fn edge_exists(&self, e: EdgeId) -> bool {
        let d = self.dim();
        let (v, axis) = (e.0 / d, e.0 % d);
        v < self.vertex_count && self.coord(v, axis) < self.upper[axis]
    }

    /// Lower endpoint and axis.
    #[inline]
    pub fn edge_parts(&self, e: EdgeId) -> (usize, usize) {
        (e.0 / self.dim(), e.0 % self.dim())
    }

    pub fn edge_endpoints(&self, e: EdgeId) -> (usize, usize) {
        let (v, axis) = self.edge_parts(e);
        (v, v + self.strides[axis])
    }

    /// Edge joining two adjacent vertices, if they are adjacent.
    pub fn edge_between(&self, u: usize, v: usize) -> Option<EdgeId> {
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        (0..self.dim()).find_map(|axis| {
            (self.neighbor(lo, axis, true) == Some(hi)).then(|| self.edge_id(lo, axis))
        })
    }

    /// Edge between two adjacent integer points.
    pub fn edge_between_points(&self, x: &[i64], y: &[i64]) -> Option<EdgeId> {
        self.edge_between(self.index_of(x)?, self.index_of(y)?)
    }

    /// Existing edges in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edge_slots()).map(EdgeId).filter(move |e| self.edge_exists(*e))
    }

    /// Smallest box containing `[lo, hi]` (real bounds).
    pub fn covering(lo: &[f64], hi: &[f64]) -> Result<Self> {
        Self::new(lo.iter().map(|v| v.floor() as i64).collect(), hi.iter().map(|v| v.ceil() as i64).collect())
    }
}
