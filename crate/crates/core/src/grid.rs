//! Uniform rectangular lattices over the complex plane: finite-difference
//! Wirtinger derivatives, local Lagrange interpolation and the smooth margin
//! taper used before periodizing.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;

/// Nodes `x0 + i·hx + i(y0 + j·hy)` for `0 <= i < nx`, `0 <= j < ny`, stored
/// row-major (`j * nx + i`). Both end points of each side are nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub hx: f64,
    pub hy: f64,
}

impl Grid {
    pub fn new(re: (f64, f64), im: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        if nx < 8 || ny < 8 {
            return Err(Error::Invalid(format!("grid needs at least 8 nodes per side, got {nx}×{ny}")));
        }
        if !(re.1 > re.0) || !(im.1 > im.0) {
            return Err(Error::Invalid("empty grid rectangle".into()));
        }
        Ok(Self {
            nx,
            ny,
            x0: re.0,
            y0: im.0,
            hx: (re.1 - re.0) / (nx - 1) as f64,
            hy: (im.1 - im.0) / (ny - 1) as f64,
        })
    }

    /// Square grid centred at `center` with half-width `half`.
    pub fn square(center: Complex64, half: f64, n: usize) -> Result<Self> {
        Self::new((center.re - half, center.re + half), (center.im - half, center.im + half), n, n)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.x0 + self.hx * i as f64, self.y0 + self.hy * j as f64)
    }

    pub fn nodes(&self) -> Vec<Complex64> {
        (0..self.len())
            .map(|k| {
                let (i, j) = self.coords(k);
                self.node(i, j)
            })
            .collect()
    }

    pub fn re_max(&self) -> f64 {
        self.x0 + self.hx * (self.nx - 1) as f64
    }

    pub fn im_max(&self) -> f64 {
        self.y0 + self.hy * (self.ny - 1) as f64
    }

    pub fn center_index(&self) -> usize {
        self.index(self.nx / 2, self.ny / 2)
    }

    pub fn cell(&self) -> f64 {
        self.hx.max(self.hy)
    }

    /// Fractional lattice coordinates of `z`.
    pub fn locate(&self, z: Complex64) -> (f64, f64) {
        ((z.re - self.x0) / self.hx, (z.im - self.y0) / self.hy)
    }

    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.x0 - slack
            && z.re <= self.re_max() + slack
            && z.im >= self.y0 - slack
            && z.im <= self.im_max() + slack
    }

    /// Nodes at least `margin` cells away from every side.
    pub fn interior(&self, margin: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| {
                let (i, j) = self.coords(k);
                i >= margin && j >= margin && i + margin < self.nx && j + margin < self.ny
            })
            .collect()
    }

    /// Field values at every node.
    pub fn sample<F>(&self, exec: Execution, f: F) -> Vec<Complex64>
    where
        F: Fn(Complex64) -> Complex64 + Sync + Send,
    {
        exec.map_range(self.len(), |k| {
            let (i, j) = self.coords(k);
            f(self.node(i, j))
        })
    }
}

/// Inclusive index rectangle `[i0, i1] × [j0, j1]` of a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub j1: usize,
}

impl Window {
    pub fn full(grid: &Grid) -> Self {
        Self {
            i0: 0,
            i1: grid.nx - 1,
            j0: 0,
            j1: grid.ny - 1,
        }
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i >= self.i0 && i <= self.i1 && j >= self.j0 && j <= self.j1
    }

    pub fn width(&self) -> usize {
        self.i1 + 1 - self.i0
    }

    pub fn height(&self) -> usize {
        self.j1 + 1 - self.j0
    }

    /// Grid indices inside the window, row-major.
    pub fn indices(&self, grid: &Grid) -> Vec<usize> {
        (self.j0..=self.j1)
            .flat_map(|j| (self.i0..=self.i1).map(move |i| grid.index(i, j)))
            .collect()
    }

    /// Shrinks every side by `k` nodes.
    pub fn shrink(&self, k: usize) -> Option<Self> {
        let w = Self {
            i0: self.i0 + k,
            i1: self.i1.checked_sub(k)?,
            j0: self.j0 + k,
            j1: self.j1.checked_sub(k)?,
        };
        (w.i0 < w.i1 && w.j0 < w.j1).then_some(w)
    }

    /// The window as a grid of its own (same spacing).
    pub fn subgrid(&self, grid: &Grid) -> Result<Grid> {
        let a = grid.node(self.i0, self.j0);
        let b = grid.node(self.i1, self.j1);
        Grid::new((a.re, b.re), (a.im, b.im), self.width(), self.height())
    }

    /// Bounding window of the nodes where the taper equals one.
    pub fn core(grid: &Grid, margin: f64) -> Option<Self> {
        let nodes = core_nodes(grid, margin);
        let mut w: Option<Self> = None;
        for k in nodes {
            let (i, j) = grid.coords(k);
            w = Some(match w {
                None => Self { i0: i, i1: i, j0: j, j1: j },
                Some(v) => Self {
                    i0: v.i0.min(i),
                    i1: v.i1.max(i),
                    j0: v.j0.min(j),
                    j1: v.j1.max(j),
                },
            });
        }
        w
    }
}

/// Finite-difference weights for the `m`-th derivative at 0 from nodes at the
/// given integer offsets (Fornberg's recursion).
pub fn fd_weights(offsets: &[f64], m: usize) -> Vec<f64> {
    let n = offsets.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = offsets[0];
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// First-derivative stencils of even `order`, centred where possible and
/// shifted one-sided near the ends; indexed by the window shift.
struct Stencils {
    order: usize,
    /// weights for a window starting `s` nodes before the target, s = 0..=order
    by_shift: Vec<Vec<f64>>,
}

impl Stencils {
    fn new(order: usize) -> Self {
        let m = order + 1;
        let by_shift = (0..m)
            .map(|s| {
                let offs: Vec<f64> = (0..m).map(|k| k as f64 - s as f64).collect();
                fd_weights(&offs, 1)
            })
            .collect();
        Self { order, by_shift }
    }

    /// Derivative along a line of `n` samples at position `i`.
    fn apply(&self, n: usize, i: usize, get: impl Fn(usize) -> Complex64, h: f64) -> Complex64 {
        let m = self.order + 1;
        let half = self.order / 2;
        let start = i.saturating_sub(half).min(n - m);
        let w = &self.by_shift[i - start];
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, wk) in w.iter().enumerate() {
            acc += get(start + k) * *wk;
        }
        acc / h
    }
}

/// `(F_ζ, F_ζ̄)` at every node with central differences of the given even
/// order (2, 4, 6, ...); one-sided stencils of the same width at the edges.
pub fn wirtinger_field(
    grid: &Grid,
    data: &[Complex64],
    order: usize,
    exec: Execution,
) -> (Vec<Complex64>, Vec<Complex64>) {
    assert!(order >= 2 && order.is_multiple_of(2) && grid.nx > order && grid.ny > order);
    let st = Stencils::new(order);
    let i_unit = Complex64::new(0.0, 1.0);
    let pairs = exec.map_range(grid.len(), |k| {
        let (i, j) = grid.coords(k);
        let fx = st.apply(grid.nx, i, |a| data[grid.index(a, j)], grid.hx);
        let fy = st.apply(grid.ny, j, |b| data[grid.index(i, b)], grid.hy);
        (0.5 * (fx - i_unit * fy), 0.5 * (fx + i_unit * fy))
    });
    pairs.into_iter().unzip()
}

fn lagrange4(t: f64) -> ([f64; 4], [f64; 4]) {
    // nodes at -1, 0, 1, 2 relative to the cell start
    let n = [-1.0, 0.0, 1.0, 2.0];
    let mut w = [0.0; 4];
    let mut dw = [0.0; 4];
    for a in 0..4 {
        let mut den = 1.0;
        for b in 0..4 {
            if b != a {
                den *= n[a] - n[b];
            }
        }
        let mut p = 1.0;
        let mut dp = 0.0;
        for b in 0..4 {
            if b != a {
                dp = dp * (t - n[b]) + p;
                p *= t - n[b];
            }
        }
        w[a] = p / den;
        dw[a] = dp / den;
    }
    (w, dw)
}

/// Tensor-product cubic Lagrange interpolation with its partials
/// `(F, F_x, F_y)`. Points off the grid are extrapolated from the edge cell.
pub fn interpolate(grid: &Grid, data: &[Complex64], z: Complex64) -> (Complex64, Complex64, Complex64) {
    let (u, v) = grid.locate(z);
    let cell = |t: f64, n: usize| -> (usize, f64) {
        let c = (t.floor().max(1.0) as usize).min(n - 3);
        (c - 1, t - c as f64)
    };
    let (i0, tx) = cell(u, grid.nx);
    let (j0, ty) = cell(v, grid.ny);
    let (wx, dwx) = lagrange4(tx);
    let (wy, dwy) = lagrange4(ty);
    let mut f = Complex64::new(0.0, 0.0);
    let mut fx = f;
    let mut fy = f;
    for b in 0..4 {
        for a in 0..4 {
            let val = data[grid.index(i0 + a, j0 + b)];
            f += val * (wx[a] * wy[b]);
            fx += val * (dwx[a] * wy[b]);
            fy += val * (wx[a] * dwy[b]);
        }
    }
    (f, fx / grid.hx, fy / grid.hy)
}

/// `C^∞` step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Weight vanishing on the outer `margin` fraction of each side and equal to
/// one on the inner core, with a smooth ramp of the same width in between.
/// `margin = 0` gives the constant 1.
pub fn taper(grid: &Grid, margin: f64) -> Vec<f64> {
    if margin <= 0.0 {
        return vec![1.0; grid.len()];
    }
    let ramp = |i: usize, n: usize| {
        let s = i as f64 / (n - 1) as f64;
        let d = s.min(1.0 - s);
        smooth_step((d - margin) / margin)
    };
    (0..grid.len())
        .map(|k| {
            let (i, j) = grid.coords(k);
            ramp(i, grid.nx) * ramp(j, grid.ny)
        })
        .collect()
}

/// Nodes whose taper weight is exactly one.
pub fn core_nodes(grid: &Grid, margin: f64) -> Vec<usize> {
    taper(grid, margin)
        .iter()
        .enumerate()
        .filter(|(_, &w)| w == 1.0)
        .map(|(k, _)| k)
        .collect()
}

/// `(Σ|a|²)^{1/2}` over the selected nodes.
pub fn l2(data: &[Complex64], nodes: &[usize]) -> f64 {
    nodes.iter().map(|&k| data[k].norm_sqr()).sum::<f64>().sqrt()
}
