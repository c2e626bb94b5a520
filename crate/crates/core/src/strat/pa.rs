use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::sampling::{self, SampleRng};

/// A closed semianalytic region of a box: `eq = 0` and `ineq >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub dim: usize,
    pub radius: f64,
    pub eq: Vec<Expr>,
    pub ineq: Vec<Expr>,
}

const MEMBER_TOL: f64 = 1e-9;

impl Region {
    pub fn new(dim: usize, radius: f64, eq: &[&str], ineq: &[&str]) -> Result<Region> {
        let parse = |v: &[&str]| v.iter().map(|s| s.parse::<Expr>()).collect::<Result<Vec<_>>>();
        Ok(Region { dim, radius, eq: parse(eq)?, ineq: parse(ineq)? })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.abs() <= self.radius + MEMBER_TOL)
            && self.eq.iter().all(|e| e.eval(x).abs() <= MEMBER_TOL)
            && self.ineq.iter().all(|e| e.eval(x) >= -MEMBER_TOL)
    }

    /// Intersection of closures. An inequality of one region whose negation
    /// is an inequality of the other becomes an equation, which keeps
    /// shared walls such as diagonals reachable by sampling.
    pub fn intersect(&self, other: &Region, rng: &mut SampleRng) -> Region {
        let mut eq: Vec<Expr> = self.eq.iter().chain(&other.eq).cloned().collect();
        let mut ineq = Vec::new();
        let probes: Vec<Vec<f64>> = (0..4).map(|_| sampling::in_box(rng, self.dim, self.radius, 1.0)).collect();
        let opposite = |a: &Expr, b: &Expr| {
            probes.iter().all(|p| {
                let (u, v) = (a.eval(p), b.eval(p));
                (u + v).abs() <= 1e-12 * (1.0 + u.abs())
            })
        };
        for a in &self.ineq {
            if other.ineq.iter().any(|b| opposite(a, b)) {
                eq.push(a.clone());
            } else {
                ineq.push(a.clone());
            }
        }
        for b in &other.ineq {
            if !self.ineq.iter().any(|a| opposite(a, b)) {
                ineq.push(b.clone());
            }
        }
        Region { dim: self.dim, radius: self.radius.min(other.radius), eq, ineq }
    }

    /// Gauss-Newton projection onto `eq = 0`.
    fn project(&self, x: &mut [f64]) -> bool {
        if self.eq.is_empty() {
            return true;
        }
        let grads: Vec<Vec<Expr>> = self.eq.iter().map(|e| e.gradient(self.dim)).collect();
        for _ in 0..50 {
            let r = DVector::from_iterator(self.eq.len(), self.eq.iter().map(|e| e.eval(&*x)));
            if r.amax() <= 1e-14 {
                return true;
            }
            let j = DMatrix::from_fn(self.eq.len(), self.dim, |i, k| grads[i][k].eval(&*x));
            let Ok(pinv) = j.clone().pseudo_inverse(1e-12) else { return false };
            let step = pinv * r;
            for (xi, s) in x.iter_mut().zip(step.iter()) {
                *xi -= s;
            }
        }
        self.eq.iter().all(|e| e.eval(&*x).abs() <= MEMBER_TOL)
    }

    /// Up to `n` sampled points of the region; fewer if it is empty or thin
    /// in a way projection cannot reach.
    pub fn sample(&self, rng: &mut SampleRng, n: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n * 200 {
            if out.len() == n {
                break;
            }
            let mut x = sampling::in_box(rng, self.dim, self.radius, 1.0);
            if self.project(&mut x) && self.contains(&x) {
                out.push(x);
            }
        }
        out
    }
}

/// One closed piece of a piecewise map, with the polynomial map used on it.
#[derive(Clone, Debug, PartialEq)]
pub struct PAPiece {
    pub name: String,
    pub region: Region,
    pub map: Vec<Expr>,
}

/// A map given piece by piece on the closures of the source strata, with
/// the closures of the target strata.
#[derive(Clone, Debug, PartialEq)]
pub struct PAMap {
    pub pieces: Vec<PAPiece>,
    pub target: Vec<Region>,
}

impl PAMap {
    /// The identity on a collection of closed pieces.
    pub fn identity(regions: &[(String, Region)]) -> PAMap {
        PAMap {
            pieces: regions
                .iter()
                .map(|(name, r)| PAPiece {
                    name: name.clone(),
                    region: r.clone(),
                    map: (0..r.dim).map(Expr::var).collect(),
                })
                .collect(),
            target: regions.iter().map(|(_, r)| r.clone()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PaVerdict {
    pub ok: bool,
    pub witness: Option<Vec<f64>>,
    pub reason: String,
}

fn eval_map(map: &[Expr], x: &[f64]) -> Vec<f64> {
    map.iter().map(|e| e.eval(x)).collect()
}

/// Sampled check that adjacent pieces agree on their common boundary and
/// that each piece maps into the closure of a single target stratum.
pub fn is_piecewise_analytic(map: &PAMap, samples_per_boundary: usize, seed: u64) -> Result<PaVerdict> {
    if map.pieces.is_empty() {
        return Err(Error::Config("piecewise map has no pieces".into()));
    }
    let mut rng = sampling::rng(seed);
    for (a, p) in map.pieces.iter().enumerate() {
        for q in &map.pieces[a + 1..] {
            let wall = p.region.intersect(&q.region, &mut rng);
            for x in wall.sample(&mut rng, samples_per_boundary) {
                let (u, v) = (eval_map(&p.map, &x), eval_map(&q.map, &x));
                let gap = u.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if gap > 1e-9 * (1.0 + u.iter().fold(0.0_f64, |m, a| m.max(a.abs()))) {
                    return Ok(PaVerdict {
                        ok: false,
                        witness: Some(x),
                        reason: format!(
                            "pieces {} and {} disagree by {gap:e} on their common boundary",
                            p.name, q.name
                        ),
                    });
                }
            }
        }
    }
    for p in &map.pieces {
        let mut candidates: Vec<usize> = (0..map.target.len()).collect();
        for x in p.region.sample(&mut rng, samples_per_boundary) {
            let y = eval_map(&p.map, &x);
            candidates.retain(|&t| map.target[t].contains(&y));
            if candidates.is_empty() {
                return Ok(PaVerdict {
                    ok: false,
                    witness: Some(x),
                    reason: format!("image of piece {} leaves every target stratum closure", p.name),
                });
            }
        }
    }
    Ok(PaVerdict { ok: true, witness: None, reason: String::new() })
}
