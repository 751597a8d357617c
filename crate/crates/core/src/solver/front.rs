use std::collections::HashMap;

use crate::grid::GridField;

/// Points of the zero level set at one time, one per sign-changing grid edge.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontCloud {
    pub time: f64,
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
}

impl FrontCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Linear interpolation of the `level` set along every axis-parallel edge whose
/// endpoints lie on opposite sides of `{u > level}`.
pub fn extract_front(grid: &GridField, level: f64) -> FrontCloud {
    let n = grid.dim();
    let (st, res, h) = (grid.strides(), grid.resolution(), grid.spacing());
    let v = grid.values();
    let mut points = Vec::new();
    let mut x = vec![0.0; n];
    for flat in 0..v.len() {
        let a_val = v[flat] - level;
        for axis in 0..n {
            if (flat / st[axis]) % res[axis] + 1 >= res[axis] {
                continue;
            }
            let b_val = v[flat + st[axis]] - level;
            if (a_val > 0.0) == (b_val > 0.0) {
                continue;
            }
            grid.coords_into(flat, &mut x);
            let mut p = x.clone();
            p[axis] += h[axis] * a_val / (a_val - b_val);
            points.push(p);
        }
    }
    FrontCloud { time: grid.time(), dim: n, points }
}

type Cell = Vec<i64>;

fn cell_of(p: &[f64], size: f64) -> Cell {
    p.iter().map(|v| (v / size).floor() as i64).collect()
}

struct Buckets<'a> {
    size: f64,
    map: HashMap<Cell, Vec<&'a [f64]>>,
}

impl<'a> Buckets<'a> {
    fn new(points: &'a [Vec<f64>], size: f64) -> Self {
        let mut map: HashMap<Cell, Vec<&'a [f64]>> = HashMap::new();
        for p in points {
            map.entry(cell_of(p, size)).or_default().push(p);
        }
        Buckets { size, map }
    }

    /// Distance from `p` to the nearest stored point, searching rings of cells
    /// until no closer point can exist.
    fn nearest(&self, p: &[f64], total: usize) -> f64 {
        let n = p.len();
        let centre = cell_of(p, self.size);
        let mut best = f64::INFINITY;
        let mut seen = 0;
        let mut ring: i64 = 0;
        loop {
            let mut offset = vec![-ring; n];
            loop {
                if offset.iter().any(|o| o.abs() == ring) {
                    let cell: Cell = centre.iter().zip(&offset).map(|(c, o)| c + o).collect();
                    if let Some(bucket) = self.map.get(&cell) {
                        for q in bucket {
                            seen += 1;
                            let d = p.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                            best = best.min(d);
                        }
                    }
                }
                let mut a = 0;
                while a < n {
                    offset[a] += 1;
                    if offset[a] <= ring {
                        break;
                    }
                    offset[a] = -ring;
                    a += 1;
                }
                if a == n {
                    break;
                }
            }
            if best <= ring as f64 * self.size || seen == total {
                return best;
            }
            ring += 1;
        }
    }
}

fn directed(from: &[Vec<f64>], to: &Buckets<'_>, total: usize) -> f64 {
    from.iter().map(|p| to.nearest(p, total)).fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between two clouds; `0` when both are empty
/// and infinite when exactly one is. `cell` sizes the spatial hash.
pub fn hausdorff_distance(a: &FrontCloud, b: &FrontCloud, cell: f64) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return f64::INFINITY,
        _ => {}
    }
    let ba = Buckets::new(&a.points, cell);
    let bb = Buckets::new(&b.points, cell);
    directed(&a.points, &bb, b.len()).max(directed(&b.points, &ba, a.len()))
}
