//! Bivariate integer polynomials, just enough for the Milnor-number and
//! blow-up references.

use std::collections::BTreeMap;

/// `sum c[(i, j)] u^i v^j`, zero coefficients never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly(pub BTreeMap<(u32, u32), i64>);

impl Poly {
    pub fn from_terms(terms: &[(i64, u32, u32)]) -> Poly {
        let mut p = Poly::default();
        for &(c, i, j) in terms {
            p.add_term(c, i, j);
        }
        p
    }

    pub fn add_term(&mut self, c: i64, i: u32, j: u32) {
        let e = self.0.entry((i, j)).or_insert(0);
        *e += c;
        if *e == 0 {
            self.0.remove(&(i, j));
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> i64 {
        self.0.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        self.0.iter().map(|(&(i, j), &c)| c as f64 * u.powi(i as i32) * v.powi(j as i32)).sum()
    }

    /// Lowest total degree of a term.
    pub fn order(&self) -> u32 {
        self.0.keys().map(|(i, j)| i + j).min().expect("nonzero polynomial")
    }

    pub fn du(&self) -> Poly {
        let mut p = Poly::default();
        for (&(i, j), &c) in &self.0 {
            if i > 0 {
                p.add_term(c * i as i64, i - 1, j);
            }
        }
        p
    }

    pub fn dv(&self) -> Poly {
        let mut p = Poly::default();
        for (&(i, j), &c) in &self.0 {
            if j > 0 {
                p.add_term(c * j as i64, i, j - 1);
            }
        }
        p
    }

    /// `p(u, u w) / u^order`, in coordinates `(u, w)`.
    pub fn blow_up_first(&self) -> Poly {
        let m = self.order();
        let mut p = Poly::default();
        for (&(i, j), &c) in &self.0 {
            p.add_term(c, i + j - m, j);
        }
        p
    }

    /// `p(s v, v) / v^order`, in coordinates `(s, v)`.
    pub fn blow_up_second(&self) -> Poly {
        let m = self.order();
        let mut p = Poly::default();
        for (&(i, j), &c) in &self.0 {
            p.add_term(c, i, i + j - m);
        }
        p
    }

    /// `p(u, v + c)`.
    pub fn shift_v(&self, c: i64) -> Poly {
        let mut p = Poly::default();
        for (&(i, j), &coef) in &self.0 {
            let mut binom: i64 = 1;
            for l in 0..=j {
                // binom = C(j, l)
                p.add_term(coef * binom * c.pow(j - l), i, l);
                binom = binom * (j - l) as i64 / (l + 1) as i64;
            }
        }
        p
    }

    /// Coefficients of `p(0, v)` by power of `v`.
    pub fn on_u_axis(&self) -> Vec<i64> {
        let deg = self.0.keys().filter(|(i, _)| *i == 0).map(|(_, j)| *j).max().unwrap_or(0);
        (0..=deg).map(|j| self.coeff(0, j)).collect()
    }
}

fn eval_univariate(coeffs: &[i64], x: i64) -> i128 {
    coeffs.iter().rev().fold(0i128, |acc, &c| acc * x as i128 + c as i128)
}

fn divide_root(coeffs: &[i64], r: i64) -> Vec<i64> {
    // Synthetic division by (v - r); the remainder is zero by assumption.
    let n = coeffs.len() - 1;
    let mut q = vec![0i64; n];
    let mut carry = 0i64;
    for k in (1..=n).rev() {
        carry = coeffs[k] + carry * r;
        q[k - 1] = carry;
    }
    q
}

/// Nonzero integer roots of a univariate polynomial with multiplicity, and
/// the multiplicity of the root zero. Panics if some root is not an integer
/// in `[-20, 20]`; the reference only handles such cases.
pub fn integer_roots(coeffs: &[i64]) -> (u32, Vec<i64>) {
    let mut c: Vec<i64> = coeffs.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0 {
        c.pop();
    }
    let mut zero = 0;
    while c.len() > 1 && c[0] == 0 {
        c.remove(0);
        zero += 1;
    }
    let mut roots = Vec::new();
    'outer: while c.len() > 1 {
        for r in (-20..=20).filter(|&r| r != 0) {
            if eval_univariate(&c, r) == 0 {
                c = divide_root(&c, r);
                roots.push(r);
                continue 'outer;
            }
        }
        panic!("polynomial {c:?} has a root outside the range handled by the reference");
    }
    (zero, roots)
}

fn rank_mod(rows: &[Vec<i64>], p: i64) -> usize {
    let mut m: Vec<Vec<i64>> = rows.iter().map(|r| r.iter().map(|v| v.rem_euclid(p)).collect()).collect();
    let cols = m.first().map_or(0, |r| r.len());
    let pow = |mut b: i64, mut e: i64| {
        let mut acc = 1i64;
        while e > 0 {
            if e & 1 == 1 {
                acc = (acc as i128 * b as i128 % p as i128) as i64;
            }
            b = (b as i128 * b as i128 % p as i128) as i64;
            e >>= 1;
        }
        acc
    };
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][col] != 0) else { continue };
        m.swap(rank, piv);
        let inv = pow(m[rank][col], p - 2);
        for r in 0..m.len() {
            if r != rank && m[r][col] != 0 {
                let f = (m[r][col] as i128 * inv as i128 % p as i128) as i64;
                for c in col..cols {
                    let v = (m[r][c] as i128 - f as i128 * m[rank][c] as i128).rem_euclid(p as i128);
                    m[r][c] = v as i64;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank over the rationals, as the largest rank modulo a few large primes.
pub fn rank(rows: &[Vec<i64>]) -> usize {
    [1_000_000_007, 998_244_353, 2_147_483_647].iter().map(|&p| rank_mod(rows, p)).max().unwrap_or(0)
}

/// Milnor number at the origin: the dimension of the local algebra
/// `C{x, y} / (f_x, f_y)`, computed as `dim C[x, y] / (J + m^N)` for growing
/// `N` until it stabilises. Returns `None` if it never does (non-isolated).
pub fn milnor_number(f: &Poly) -> Option<usize> {
    let gens = [f.du(), f.dv()];
    let mut last = None;
    for n in 2..16u32 {
        let monomials: Vec<(u32, u32)> = (0..n).flat_map(|d| (0..=d).map(move |i| (i, d - i))).collect();
        let col = |i: u32, j: u32| monomials.iter().position(|&m| m == (i, j));
        let mut rows = Vec::new();
        for g in &gens {
            for &(a, b) in &monomials {
                let mut row = vec![0i64; monomials.len()];
                for (&(i, j), &c) in &g.0 {
                    if let Some(k) = col(i + a, j + b) {
                        row[k] += c;
                    }
                }
                rows.push(row);
            }
        }
        let mu = monomials.len() - rank(&rows);
        if last == Some(mu) && n > 4 {
            return Some(mu);
        }
        last = Some(mu);
    }
    None
}
