use std::ops::Range;

use crate::ingest::ConductiveGrid;

/// Stencil topology of a grid: padded layout, conductive runs per row and
/// the number of conductive 4-neighbours of every node.
///
/// Fields are stored with a one-node zero halo, so node `(x, y)` lives at
/// index `(y + 1) * stride + x + 1` with `stride = width + 2`. Entries that
/// are not conductive are held at zero and never written, which lets the
/// Laplacian sum all four neighbours unconditionally.
#[derive(Debug, Clone)]
pub struct Lattice {
    width: usize,
    height: usize,
    stride: usize,
    /// Runs of consecutive conductive nodes, as padded index ranges.
    runs: Vec<Range<usize>>,
    /// `runs[row_runs[y]]` are the runs of grid row `y`.
    row_runs: Vec<Range<usize>>,
    degree: Vec<u8>,
    conductive: usize,
}

impl Lattice {
    pub fn new(grid: &ConductiveGrid) -> Self {
        let (width, height) = (grid.width(), grid.height());
        let stride = width + 2;
        let mask = grid.mask();
        let mut runs = Vec::new();
        let mut row_runs = Vec::with_capacity(height);
        let mut degree = vec![0u8; stride * (height + 2)];

        for y in 0..height {
            let first = runs.len();
            let row = &mask[y * width..(y + 1) * width];
            let mut x = 0;
            while x < width {
                if !row[x] {
                    x += 1;
                    continue;
                }
                let start = x;
                while x < width && row[x] {
                    x += 1;
                }
                let base = (y + 1) * stride + 1;
                runs.push(base + start..base + x);
            }
            row_runs.push(first..runs.len());

            for (x, _) in row.iter().enumerate().filter(|(_, &m)| m) {
                let xi = x as isize;
                let yi = y as isize;
                let k = [(-1, 0), (1, 0), (0, -1), (0, 1)]
                    .iter()
                    .filter(|(dx, dy)| {
                        let (nx, ny) = (xi + dx, yi + dy);
                        nx >= 0 && ny >= 0 && grid.is_conductive(nx as usize, ny as usize)
                    })
                    .count();
                degree[(y + 1) * stride + x + 1] = k as u8;
            }
        }

        Self {
            width,
            height,
            stride,
            runs,
            row_runs,
            degree,
            conductive: grid.conductive_count(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn padded_len(&self) -> usize {
        self.stride * (self.height + 2)
    }

    pub fn conductive_count(&self) -> usize {
        self.conductive
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        (y + 1) * self.stride + x + 1
    }

    /// Grid position of a padded index.
    pub fn position(&self, index: usize) -> (usize, usize) {
        (index % self.stride - 1, index / self.stride - 1)
    }

    pub fn degree(&self) -> &[u8] {
        &self.degree
    }

    /// All conductive runs in row-major order.
    pub fn runs(&self) -> &[Range<usize>] {
        &self.runs
    }

    pub fn row_runs(&self, y: usize) -> &[Range<usize>] {
        &self.runs[self.row_runs[y].clone()]
    }

    /// Padded indices of every conductive node, row-major.
    pub fn conductive_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.runs.iter().flat_map(Clone::clone)
    }

    pub(crate) fn matches(&self, state: &FieldState) -> bool {
        state.width == self.width && state.height == self.height
    }
}

/// Simulation state: iteration counter plus `u` and `v` on the padded layout
/// of [`Lattice`]. Non-conductive entries carry no state and stay at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub(crate) t: u64,
    pub(crate) width: usize,
    pub(crate) height: usize,
    pub(crate) u: Vec<f64>,
    pub(crate) v: Vec<f64>,
}

impl FieldState {
    /// The resting state `u = v = 0` at `t = 0`.
    pub fn resting(grid: &ConductiveGrid) -> Self {
        let len = (grid.width() + 2) * (grid.height() + 2);
        Self {
            t: 0,
            width: grid.width(),
            height: grid.height(),
            u: vec![0.0; len],
            v: vec![0.0; len],
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    fn index(&self, x: usize, y: usize) -> usize {
        (y + 1) * (self.width + 2) + x + 1
    }

    /// `u` at a node; zero for non-conductive or out-of-range nodes.
    pub fn u(&self, x: usize, y: usize) -> f64 {
        if x < self.width && y < self.height {
            self.u[self.index(x, y)]
        } else {
            0.0
        }
    }

    pub fn v(&self, x: usize, y: usize) -> f64 {
        if x < self.width && y < self.height {
            self.v[self.index(x, y)]
        } else {
            0.0
        }
    }

    /// Overwrite `(u, v)` at a node. Returns `false` (and changes nothing)
    /// when the node is not conductive.
    pub fn set(&mut self, grid: &ConductiveGrid, x: usize, y: usize, u: f64, v: f64) -> bool {
        if !grid.is_conductive(x, y) || grid.width() != self.width || grid.height() != self.height {
            return false;
        }
        let i = self.index(x, y);
        self.u[i] = u;
        self.v[i] = v;
        true
    }

    /// Padded `u` array (see [`Lattice`] for the layout).
    pub fn u_padded(&self) -> &[f64] {
        &self.u
    }

    pub fn v_padded(&self) -> &[f64] {
        &self.v
    }

    /// `u` over conductive nodes in row-major order.
    pub fn conductive_u<'a>(&'a self, grid: &'a ConductiveGrid) -> impl Iterator<Item = f64> + 'a {
        grid.conductive_nodes().map(|(x, y)| self.u(x, y))
    }

    /// Largest `u` over conductive nodes (0 for an empty grid).
    pub fn max_u(&self, lattice: &Lattice) -> f64 {
        lattice
            .conductive_indices()
            .map(|i| self.u[i])
            .fold(0.0, f64::max)
    }
}
