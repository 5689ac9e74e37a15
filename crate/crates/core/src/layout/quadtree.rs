//! Barnes-Hut quadtree over weighted points.
//!
//! Bodies are inserted in index order and children are kept in the order
//! NW, NE, SW, SE, so traversal and floating-point reduction order depend
//! only on the input. Each cell carries its mass, centroid, mean radius and
//! the complex moments of its bodies about the centroid, so a far cell can
//! stand in for its bodies as one expanded body.

const MAX_DEPTH: usize = 48;
const NEAR_TOLERANCE: f64 = 3e-3;

#[derive(Debug, Clone)]
struct Cell {
    /// Lower-left corner and side length.
    x0: f64,
    y0: f64,
    size: f64,
    mass: f64,
    centroid: [f64; 2],
    mean_radius: f64,
    max_radius: f64,
    /// Largest distance from the centroid to a body of the cell.
    reach: f64,
    /// `sum m (z - centroid)^k` for k = 2..=order, as (re, im).
    moments: Vec<[f64; 2]>,
    children: Option<[usize; 4]>,
    bodies: Vec<usize>,
}

impl Cell {
    fn new(x0: f64, y0: f64, size: f64) -> Self {
        Self {
            x0,
            y0,
            size,
            mass: 0.0,
            centroid: [0.0; 2],
            mean_radius: 0.0,
            max_radius: 0.0,
            reach: 0.0,
            moments: Vec::new(),
            children: None,
            bodies: Vec::new(),
        }
    }

    fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x0
            && p[0] <= self.x0 + self.size
            && p[1] >= self.y0
            && p[1] <= self.y0 + self.size
    }

    /// Child slot for a point: 0 NW, 1 NE, 2 SW, 3 SE.
    fn quadrant(&self, p: [f64; 2]) -> usize {
        let half = self.size / 2.0;
        let east = p[0] >= self.x0 + half;
        let north = p[1] >= self.y0 + half;
        match (north, east) {
            (true, false) => 0,
            (true, true) => 1,
            (false, false) => 2,
            (false, true) => 3,
        }
    }
}

#[inline]
fn cmul(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]]
}

#[inline]
fn cdiv(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let d = b[0] * b[0] + b[1] * b[1];
    [
        (a[0] * b[0] + a[1] * b[1]) / d,
        (a[1] * b[0] - a[0] * b[1]) / d,
    ]
}

#[derive(Debug, Clone)]
pub struct QuadTree {
    cells: Vec<Cell>,
    order: usize,
}

/// A contribution to the force on one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Body<'a> {
    Aggregate {
        centroid: [f64; 2],
        mass: f64,
        mean_radius: f64,
        reach: f64,
        moments: &'a [[f64; 2]],
    },
    Single(usize),
}

/// Terms of the expansion are dropped once their bound falls below this
/// share of the monopole term.
const SERIES_CUTOFF: f64 = 1e-9;

/// Gradient of `sum m ln|p - z_b|` for the bodies summarized by a cell,
/// truncated after the moments given. `z` is `p - centroid` and `reach`
/// bounds the distance of the bodies from the centroid; `|a_k| <= M reach^k`
/// lets the series stop early.
pub fn far_field(z: [f64; 2], mass: f64, reach: f64, moments: &[[f64; 2]]) -> [f64; 2] {
    // f'(z) = M / z + sum_k a_k / z^(k+1); the gradient is its conjugate
    let mut deriv = cdiv([mass, 0.0], z);
    let ratio = reach / (z[0] * z[0] + z[1] * z[1]).sqrt();
    let mut bound = ratio;
    let mut zpow = cmul(z, z);
    for a in moments {
        bound *= ratio;
        if bound < SERIES_CUTOFF {
            break;
        }
        zpow = cmul(zpow, z);
        let t = cdiv(*a, zpow);
        deriv[0] += t[0];
        deriv[1] += t[1];
    }
    [deriv[0], -deriv[1]]
}

impl QuadTree {
    /// Builds a tree over a bounding square covering every point. `order`
    /// is the highest moment kept (1 means plain centre of mass).
    pub fn build(points: &[[f64; 2]], masses: &[f64], radii: &[f64], order: usize) -> Self {
        let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in points {
            lo_x = lo_x.min(p[0]);
            lo_y = lo_y.min(p[1]);
            hi_x = hi_x.max(p[0]);
            hi_y = hi_y.max(p[1]);
        }
        if points.is_empty() {
            (lo_x, lo_y, hi_x, hi_y) = (0.0, 0.0, 1.0, 1.0);
        }
        let size = (hi_x - lo_x).max(hi_y - lo_y).max(1e-9) * (1.0 + 1e-9);
        let mut tree = Self {
            cells: vec![Cell::new(lo_x, lo_y, size)],
            order: order.max(1),
        };
        for (i, &p) in points.iter().enumerate() {
            tree.insert(i, p, points);
        }

        let mut sums = vec![[0.0f64; 4]; tree.cells.len()];
        let mut max_r = vec![0.0f64; tree.cells.len()];
        for (i, &p) in points.iter().enumerate() {
            let m = masses[i];
            tree.walk(p, |ci| {
                max_r[ci] = max_r[ci].max(radii[i]);
                let s = &mut sums[ci];
                s[0] += m;
                s[1] += m * p[0];
                s[2] += m * p[1];
                s[3] += m * radii[i];
            });
        }
        let n_moments = tree.order - 1;
        for (ci, c) in tree.cells.iter_mut().enumerate() {
            c.mass = sums[ci][0];
            if c.mass > 0.0 {
                c.centroid = [sums[ci][1] / c.mass, sums[ci][2] / c.mass];
                c.mean_radius = sums[ci][3] / c.mass;
                c.max_radius = max_r[ci];
            }
            c.moments = vec![[0.0; 2]; n_moments];
        }
        for &p in points {
            let cells = &mut tree.cells;
            let mut ci = 0;
            loop {
                let c = &mut cells[ci];
                c.reach = c
                    .reach
                    .max((p[0] - c.centroid[0]).hypot(p[1] - c.centroid[1]));
                match c.children {
                    Some(ch) => ci = ch[c.quadrant(p)],
                    None => break,
                }
            }
        }
        if n_moments > 0 {
            let mut acc = vec![vec![[0.0f64; 2]; n_moments]; tree.cells.len()];
            for (i, &p) in points.iter().enumerate() {
                let m = masses[i];
                let cells = &tree.cells;
                tree.walk(p, |ci| {
                    let c = cells[ci].centroid;
                    let z = [p[0] - c[0], p[1] - c[1]];
                    let mut zk = cmul(z, z);
                    for a in acc[ci].iter_mut() {
                        a[0] += m * zk[0];
                        a[1] += m * zk[1];
                        zk = cmul(zk, z);
                    }
                });
            }
            for (c, a) in tree.cells.iter_mut().zip(acc) {
                c.moments = a;
            }
        }
        tree
    }

    /// Calls `f` on every cell from the root down to the leaf holding `p`.
    fn walk(&self, p: [f64; 2], mut f: impl FnMut(usize)) {
        let mut ci = 0;
        loop {
            f(ci);
            match self.cells[ci].children {
                Some(ch) => ci = ch[self.cells[ci].quadrant(p)],
                None => return,
            }
        }
    }

    fn insert(&mut self, body: usize, p: [f64; 2], points: &[[f64; 2]]) {
        let mut cell = 0;
        let mut depth = 0;
        loop {
            if let Some(children) = self.cells[cell].children {
                cell = children[self.cells[cell].quadrant(p)];
                depth += 1;
                continue;
            }
            if self.cells[cell].bodies.is_empty() || depth >= MAX_DEPTH {
                self.cells[cell].bodies.push(body);
                return;
            }
            // split the leaf, push its body down, then keep descending
            let c = &mut self.cells[cell];
            let (x0, y0, half) = (c.x0, c.y0, c.size / 2.0);
            let existing = std::mem::take(&mut c.bodies);
            let base = self.cells.len();
            self.cells.push(Cell::new(x0, y0 + half, half));
            self.cells.push(Cell::new(x0 + half, y0 + half, half));
            self.cells.push(Cell::new(x0, y0, half));
            self.cells.push(Cell::new(x0 + half, y0, half));
            self.cells[cell].children = Some([base, base + 1, base + 2, base + 3]);
            for b in existing {
                let slot = self.cells[cell].quadrant(points[b]);
                self.cells[base + slot].bodies.push(b);
            }
        }
    }

    /// Visits the bodies acting on the point `p` (body `skip` itself
    /// excluded). A cell not containing `p` is one aggregate body iff
    /// `width / distance-to-centroid < theta`, its bodies lie within
    /// `theta / 2` of that distance from the centroid, and, with
    /// `near = Some((r, k))`, its bodies stay more than `k` combined radii
    /// away and the border factor error estimate is within tolerance.
    pub fn for_each_body<'a>(
        &'a self,
        p: [f64; 2],
        skip: usize,
        theta: f64,
        near: Option<(f64, f64)>,
        mut f: impl FnMut(Body<'a>),
    ) {
        let mut stack = vec![0usize];
        while let Some(ci) = stack.pop() {
            let c = &self.cells[ci];
            if c.mass == 0.0 {
                continue;
            }
            match c.children {
                None => {
                    for &b in &c.bodies {
                        if b != skip {
                            f(Body::Single(b));
                        }
                    }
                }
                Some(children) => {
                    let d =
                        ((p[0] - c.centroid[0]).powi(2) + (p[1] - c.centroid[1]).powi(2)).sqrt();
                    if !c.contains(p)
                        && d > 0.0
                        && c.size / d < theta
                        && self.accepts(c, d, theta, near)
                    {
                        f(Body::Aggregate {
                            centroid: c.centroid,
                            mass: c.mass,
                            mean_radius: c.mean_radius,
                            reach: c.reach,
                            moments: &c.moments,
                        });
                    } else {
                        // reversed so children pop in NW, NE, SW, SE order
                        for &ch in children.iter().rev() {
                            stack.push(ch);
                        }
                    }
                }
            }
        }
    }

    /// Error checks beyond the opening angle: the expansion must converge
    /// comfortably and, with radii, the border factor taken at the
    /// centroid must stay close to the one each body would get.
    fn accepts(&self, c: &Cell, d: f64, theta: f64, near: Option<(f64, f64)>) -> bool {
        let half = theta / 2.0;
        if c.reach >= half * d {
            return false;
        }
        near.is_none_or(|(r, k)| {
            let s = r + c.max_radius;
            let border = d - s - c.reach;
            border > k * s
                && s * c.reach * c.reach / (d * d * border) < NEAR_TOLERANCE * half * half
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.cells[0].mass
    }
}
