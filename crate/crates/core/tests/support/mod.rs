//! Reference computations used by the integration tests. None of them calls
//! into the library: each recomputes a quantity from first principles so that
//! agreement is evidence rather than tautology.

#![allow(dead_code)]

pub mod blowup;
pub mod poly;

use std::collections::VecDeque;
use std::f64::consts::TAU;

use num_complex::Complex64;

/// Components of `{ sum a_i alpha_i = c mod 2 pi }` in the torus
/// `(R / 2 pi Z)^k`, by breadth-first search over the closed grid cells
/// the level set meets, with `n` cells per axis and periodic face adjacency.
pub fn torus_bfs_components(a: &[u32], c: f64, n: usize) -> usize {
    let k = a.len();
    let h = TAU / n as f64;
    let total = n.pow(k as u32);
    let span: f64 = a.iter().map(|&v| v as f64 * h).sum();
    let index = |cell: &[usize]| cell.iter().rev().fold(0usize, |acc, &i| acc * n + i);
    let cell_of = |mut idx: usize| -> Vec<usize> {
        (0..k)
            .map(|_| {
                let i = idx % n;
                idx /= n;
                i
            })
            .collect()
    };
    let marked: Vec<bool> = (0..total)
        .map(|idx| {
            let cell = cell_of(idx);
            let lo: f64 = cell.iter().zip(a).map(|(&i, &ai)| ai as f64 * i as f64 * h).sum();
            let hi = lo + span;
            // Some c + 2 pi j in [lo, hi].
            let j = ((lo - c) / TAU).ceil();
            c + TAU * j <= hi + 1e-12
        })
        .collect();
    let mut seen = vec![false; total];
    let mut components = 0;
    for start in 0..total {
        if !marked[start] || seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(idx) = queue.pop_front() {
            let cell = cell_of(idx);
            for axis in 0..k {
                for step in [1, n - 1] {
                    let mut nb = cell.clone();
                    nb[axis] = (nb[axis] + step) % n;
                    let j = index(&nb);
                    if marked[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    components
}

/// Grid resolution at which distinct components of the level set cannot
/// share adjacent cells.
pub fn torus_grid_size(a: &[u32]) -> usize {
    let norm = a.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
    let k = a.len() as f64;
    ((4.0 * k.sqrt() * norm).ceil() as usize).max(24)
}

/// Number of clusters of points, two points joined when closer than `r`.
pub fn cluster_count(points: &[Vec<f64>], r: f64) -> usize {
    let mut parent: Vec<usize> = (0..points.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if d < r {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    (0..points.len()).filter(|&i| find(&mut parent, i) == i).count()
}

/// Points of `{ phi = 0 }` in the disc of radius `ball` about `center` in
/// the plane, found by scanning horizontal and vertical grid lines with
/// spacing `h` for sign changes and bisecting.
pub fn planar_level_set(phi: impl Fn(f64, f64) -> f64, center: (f64, f64), ball: f64, h: f64) -> Vec<Vec<f64>> {
    let inside = |x: f64, y: f64| (x - center.0).hypot(y - center.1) < ball;
    let steps = (2.0 * ball / h).ceil() as i64;
    let mut out = Vec::new();
    for line in 0..=steps {
        let fixed = -ball + line as f64 * h;
        for horizontal in [true, false] {
            let at =
                |t: f64| if horizontal { (center.0 + t, center.1 + fixed) } else { (center.0 + fixed, center.1 + t) };
            let mut prev: Option<(f64, f64)> = None;
            for s in 0..=steps {
                let t = -ball + s as f64 * h;
                let (x, y) = at(t);
                if !inside(x, y) {
                    prev = None;
                    continue;
                }
                let v = phi(x, y);
                if let Some((t0, v0)) = prev {
                    if (v0 < 0.0) != (v < 0.0) {
                        let (mut lo, mut hi) = (t0, t);
                        for _ in 0..60 {
                            let mid = 0.5 * (lo + hi);
                            let (mx, my) = at(mid);
                            if (phi(mx, my) < 0.0) == (v0 < 0.0) {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        let (x, y) = at(0.5 * (lo + hi));
                        out.push(vec![x, y]);
                    }
                }
                prev = Some((t, v));
            }
        }
    }
    out
}

/// Outcome of a fixed-step integration up to a terminal event.
pub struct DenseRun {
    pub hit_time: f64,
    pub terminal: Vec<f64>,
}

/// Classical fourth-order Runge-Kutta with step `h` until `event` changes
/// sign, the crossing located by linear interpolation within the last step.
pub fn rk4_until(
    rhs: impl Fn(&[f64]) -> Vec<f64>,
    y0: &[f64],
    h: f64,
    event: impl Fn(&[f64]) -> f64,
    t_max: f64,
) -> Option<DenseRun> {
    let axpy = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let mut y = y0.to_vec();
    let mut t = 0.0;
    let mut e = event(&y);
    while t < t_max {
        let k1 = rhs(&y);
        let k2 = rhs(&axpy(&y, &k1, h / 2.0));
        let k3 = rhs(&axpy(&y, &k2, h / 2.0));
        let k4 = rhs(&axpy(&y, &k3, h));
        let next: Vec<f64> =
            (0..y.len()).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
        let e_next = event(&next);
        if e_next <= 0.0 {
            let s = e / (e - e_next);
            let terminal = y.iter().zip(&next).map(|(a, b)| a + s * (b - a)).collect();
            return Some(DenseRun { hit_time: t + s * h, terminal });
        }
        y = next;
        e = e_next;
        t += h;
    }
    None
}

/// Follows the `m` roots of `z^m = r e^(i theta)` as `theta` runs from 0 to
/// `2 pi` in small steps, matching each root to its nearest successor.
/// Entry `j` of the result is the index, among the starting roots, of where
/// root `j` ends up.
pub fn track_power_roots(m: usize, r: f64, steps: usize) -> (Vec<Complex64>, Vec<usize>) {
    let roots = |theta: f64| -> Vec<Complex64> {
        (0..m).map(|j| Complex64::from_polar(r.powf(1.0 / m as f64), (theta + TAU * j as f64) / m as f64)).collect()
    };
    let start = roots(0.0);
    let mut current = start.clone();
    for s in 1..=steps {
        let next = roots(TAU * s as f64 / steps as f64);
        current = current
            .iter()
            .map(|z| *next.iter().min_by(|a, b| (*a - z).norm().total_cmp(&(*b - z).norm())).unwrap())
            .collect();
    }
    let perm = current
        .iter()
        .map(|z| (0..m).min_by(|&a, &b| (start[a] - z).norm().total_cmp(&(start[b] - z).norm())).unwrap())
        .collect();
    (start, perm)
}

pub fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
