use crate::grid::{gradient, Field, Grid};
use crate::{Error, Result};
use std::collections::HashMap;

const STENCIL: usize = 5;
/// Stencil points are `n / SPAN_DIVISOR` vertices apart on a component
/// with `n` vertices.
const SPAN_DIVISOR: usize = 40;

/// Edge of the dual (cell-centre) lattice: `(horizontal, i, j)` joins
/// centre `(i, j)` to `(i + 1, j)` or `(i, j + 1)`.
type EdgeKey = (bool, usize, usize);

#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

impl Polyline {
    pub fn length(&self) -> f64 {
        let n = self.points.len();
        let open = self.points.windows(2).map(|w| dist(w[0], w[1])).sum::<f64>();
        if self.closed && n > 2 {
            open + dist(self.points[n - 1], self.points[0])
        } else {
            open
        }
    }
}

/// Zero level set of `φ` with curvature samples at its vertices.
#[derive(Clone, Debug)]
pub struct InterfaceCurve {
    pub polylines: Vec<Polyline>,
    /// One entry per sampled vertex, positive when `φ > 0` lies on the
    /// concave side.
    pub curvature: Vec<f64>,
    pub sample_points: Vec<(f64, f64)>,
    /// Grid indices of the edge endpoints and the crossing parameter.
    sample_edges: Vec<(usize, usize, f64)>,
    grid: Grid,
}

impl InterfaceCurve {
    pub fn length(&self) -> f64 {
        self.polylines.iter().map(Polyline::length).sum()
    }

    pub fn segments(&self) -> Vec<((f64, f64), (f64, f64))> {
        let mut out = Vec::new();
        for p in &self.polylines {
            out.extend(p.points.windows(2).map(|w| (w[0], w[1])));
            if p.closed && p.points.len() > 2 {
                out.push((*p.points.last().unwrap(), p.points[0]));
            }
        }
        out
    }

    /// Values of a grid field at the curvature samples.
    pub fn sample(&self, f: &Field) -> Result<Vec<f64>> {
        if f.grid() != &self.grid {
            return Err(Error::InvalidArgument("field grid differs from the interface grid".into()));
        }
        let v = f.values();
        Ok(self
            .sample_edges
            .iter()
            .map(|&(a, b, t)| (1.0 - t) * v[a] + t * v[b])
            .collect())
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

struct Crossing {
    point: (f64, f64),
    a: usize,
    b: usize,
    t: f64,
}

fn crossing(phi: &[f64], grid: &Grid, key: EdgeKey) -> Option<Crossing> {
    let (horizontal, i, j) = key;
    let (i2, j2) = if horizontal { (i + 1, j) } else { (i, j + 1) };
    let (a, b) = (grid.index(i, j), grid.index(i2, j2));
    let (fa, fb) = (phi[a], phi[b]);
    if (fa > 0.0) == (fb > 0.0) {
        return None;
    }
    let t = fa / (fa - fb);
    let (xa, ya) = (grid.x(i), grid.y(j));
    let (xb, yb) = (grid.x(i2), grid.y(j2));
    Some(Crossing {
        point: (xa + t * (xb - xa), ya + t * (yb - ya)),
        a,
        b,
        t,
    })
}

/// Marching squares on the cell-centre lattice; saddles are resolved by
/// the average of the four corners.
fn marching_segments(phi: &[f64], grid: &Grid) -> Vec<(EdgeKey, EdgeKey)> {
    let mut segs = Vec::new();
    for j in 0..grid.ny() - 1 {
        for i in 0..grid.nx() - 1 {
            let c = [
                phi[grid.index(i, j)],
                phi[grid.index(i + 1, j)],
                phi[grid.index(i + 1, j + 1)],
                phi[grid.index(i, j + 1)],
            ];
            // bottom, right, top, left
            let edges: [EdgeKey; 4] = [(true, i, j), (false, i + 1, j), (true, i, j + 1), (false, i, j)];
            let pos = c.map(|v| v > 0.0);
            let cut: Vec<usize> = (0..4).filter(|&e| pos[e] != pos[(e + 1) % 4]).collect();
            match cut.len() {
                2 => segs.push((edges[cut[0]], edges[cut[1]])),
                4 => {
                    let centre = c.iter().sum::<f64>() / 4.0 > 0.0;
                    if centre == pos[0] {
                        // corners 1 and 3 are isolated
                        segs.push((edges[0], edges[1]));
                        segs.push((edges[2], edges[3]));
                    } else {
                        segs.push((edges[3], edges[0]));
                        segs.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }
    segs
}

/// Chains segments sharing an edge into polylines of edge keys.
fn chain(segs: &[(EdgeKey, EdgeKey)]) -> Vec<(Vec<EdgeKey>, bool)> {
    let mut at: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (k, &(a, b)) in segs.iter().enumerate() {
        at.entry(a).or_default().push(k);
        at.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segs.len()];
    let mut out = Vec::new();
    let other = |k: usize, e: EdgeKey| if segs[k].0 == e { segs[k].1 } else { segs[k].0 };
    let walk = |start: usize, from: EdgeKey, used: &mut Vec<bool>| {
        let mut keys = Vec::new();
        let mut k = start;
        let mut e = other(k, from);
        loop {
            used[k] = true;
            keys.push(e);
            match at[&e].iter().copied().find(|&m| !used[m]) {
                Some(m) => {
                    k = m;
                    e = other(m, e);
                }
                None => break,
            }
        }
        keys
    };
    // Open chains start at edges touched by one segment.
    let mut starts: Vec<(EdgeKey, usize)> = at
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(e, v)| (*e, v[0]))
        .collect();
    starts.sort();
    for (e, k) in starts {
        if used[k] {
            continue;
        }
        let mut keys = vec![e];
        keys.extend(walk(k, e, &mut used));
        out.push((keys, false));
    }
    for k in 0..segs.len() {
        if used[k] {
            continue;
        }
        let e = segs[k].0;
        let mut keys = walk(k, e, &mut used);
        // the walk ends back on the starting edge
        if keys.last() == Some(&e) {
            keys.pop();
        }
        keys.insert(0, e);
        out.push((keys, true));
    }
    out
}

/// Algebraic circle fit; returns the centre and radius, `None` when the
/// points are (numerically) collinear.
fn fit_circle(pts: &[(f64, f64)]) -> Option<((f64, f64), f64)> {
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
    let scale = pts.iter().map(|p| dist(*p, (mx, my))).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    // Minimise Σ (x² + y² + D x + E y + F)² in scaled local coordinates.
    let mut a = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for p in pts {
        let (x, y) = ((p.0 - mx) / scale, (p.1 - my) / scale);
        let row = [x, y, 1.0];
        let z = -(x * x + y * y);
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += row[i] * row[j];
            }
            r[i] += row[i] * z;
        }
    }
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&a);
    if d.abs() < 1e-12 {
        return None;
    }
    let mut sol = [0.0; 3];
    for (k, s) in sol.iter_mut().enumerate() {
        let mut m = a;
        for i in 0..3 {
            m[i][k] = r[i];
        }
        *s = det(&m) / d;
    }
    let (cx, cy) = (-sol[0] / 2.0, -sol[1] / 2.0);
    let r2 = cx * cx + cy * cy - sol[2];
    if !(r2 > 0.0) || !r2.is_finite() {
        return None;
    }
    Some(((mx + cx * scale, my + cy * scale), r2.sqrt() * scale))
}

/// Zero level set of a 2D field with signed curvature at every vertex of
/// polylines with at least five vertices.
pub fn extract_interface(phi: &Field) -> Result<InterfaceCurve> {
    let grid = *phi.grid();
    if grid.dim() != 2 {
        return Err(Error::Geometry("interface extraction needs a 2D grid".into()));
    }
    let v = phi.values();
    if !(phi.min() <= 0.0 && phi.max() > 0.0) {
        return Err(Error::EmptyInterface);
    }
    let segs = marching_segments(v, &grid);
    if segs.is_empty() {
        return Err(Error::EmptyInterface);
    }
    let (gx, gy) = gradient(phi);
    let mut curve = InterfaceCurve {
        polylines: Vec::new(),
        curvature: Vec::new(),
        sample_points: Vec::new(),
        sample_edges: Vec::new(),
        grid,
    };
    for (keys, closed) in chain(&segs) {
        let xs: Vec<Crossing> = keys
            .iter()
            .map(|&k| crossing(v, &grid, k).expect("segment edges carry a sign change"))
            .collect();
        let points: Vec<(f64, f64)> = xs.iter().map(|c| c.point).collect();
        let n = points.len();
        if n >= STENCIL {
            let stride = (n / SPAN_DIVISOR).max(1);
            let half = STENCIL / 2 * stride;
            for (i, c) in xs.iter().enumerate() {
                let window: Vec<(f64, f64)> = if closed {
                    (0..STENCIL).map(|k| points[(i + n + k * stride - half) % n]).collect()
                } else {
                    let lo = i.saturating_sub(half).min(n - 1 - 2 * half);
                    (0..STENCIL).map(|k| points[lo + k * stride]).collect()
                };
                let kappa = match fit_circle(&window) {
                    Some((centre, radius)) => {
                        let gxi = (1.0 - c.t) * gx.values()[c.a] + c.t * gx.values()[c.b];
                        let gyi = (1.0 - c.t) * gy.values()[c.a] + c.t * gy.values()[c.b];
                        let towards = (centre.0 - c.point.0) * gxi + (centre.1 - c.point.1) * gyi;
                        if towards >= 0.0 {
                            1.0 / radius
                        } else {
                            -1.0 / radius
                        }
                    }
                    None => 0.0,
                };
                curve.curvature.push(kappa);
                curve.sample_points.push(c.point);
                curve.sample_edges.push((c.a, c.b, c.t));
            }
        }
        curve.polylines.push(Polyline { points, closed });
    }
    Ok(curve)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Median over interface samples of `|μ − θκ|`.
pub fn gibbs_thomson_residual(curve: &InterfaceCurve, mu: &Field, theta: f64) -> Result<f64> {
    let m = curve.sample(mu)?;
    if m.is_empty() {
        return Err(Error::EmptyInterface);
    }
    Ok(median(
        m.iter()
            .zip(&curve.curvature)
            .map(|(m, k)| (m - theta * k).abs())
            .collect(),
    ))
}
