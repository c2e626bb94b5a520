use std::collections::BTreeSet;

use crate::expr::{mul, sub, Expr};

use super::pa::Region;

/// Indices `i` (among the first `eps.len()` coordinates) where `eps_i x_i`
/// attains its minimum, up to `tol`.
pub fn tie_set(eps: &[i8], x: &[f64], tol: f64) -> BTreeSet<usize> {
    let vals: Vec<f64> = eps.iter().zip(x).map(|(&e, &v)| e as f64 * v).collect();
    let m = vals.iter().copied().fold(f64::INFINITY, f64::min);
    vals.iter().enumerate().filter(|(_, &v)| v - m <= tol).map(|(i, _)| i).collect()
}

/// `U_i = { x in U(eps) : eps_i x_i <= eps_j x_j for all j }`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedPiece {
    pub index: usize,
    eps: Vec<i8>,
}

impl ClosedPiece {
    fn signed(&self, x: &[f64], j: usize) -> f64 {
        self.eps[j] as f64 * x[j]
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let k = self.eps.len();
        (0..k).all(|j| self.signed(x, j) >= -tol && self.signed(x, self.index) <= self.signed(x, j) + tol)
    }

    /// Membership away from every other piece.
    pub fn contains_strictly(&self, x: &[f64], tol: f64) -> bool {
        let k = self.eps.len();
        self.contains(x, tol) && (0..k).all(|j| j == self.index || self.signed(x, self.index) < self.signed(x, j) - tol)
    }

    /// The piece as a region of the box of half-width `radius` in `R^n`.
    pub fn region(&self, n: usize, radius: f64) -> Region {
        let k = self.eps.len();
        let s = |j: usize| mul(Expr::num(self.eps[j] as f64), Expr::var(j));
        let mut ineq: Vec<Expr> = (0..k).map(s).collect();
        ineq.extend((0..k).filter(|&j| j != self.index).map(|j| sub(s(j), s(self.index))));
        Region { dim: n, radius, eq: vec![], ineq }
    }
}

/// A stratum of the substratification: the points whose tie set is `tie`.
/// Its codimension inside the quadrant is `tie.len() - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TieStratum {
    pub tie: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Substratification {
    pub eps: Vec<i8>,
    pub n: usize,
    pub pieces: Vec<ClosedPiece>,
    pub strata: Vec<TieStratum>,
}

impl Substratification {
    pub fn pieces_containing(&self, x: &[f64], tol: f64) -> Vec<usize> {
        self.pieces.iter().filter(|p| p.contains(x, tol)).map(|p| p.index).collect()
    }
}

/// Splits the quadrant `U(eps)` of `R^n` (signs on the first `k = eps.len()`
/// coordinates) into the closed pieces on which one signed coordinate is
/// smallest. On each piece the retraction along `-eps` is the restriction of
/// a linear map. With `k = 0` the quadrant is a single piece.
pub fn min_substratification(eps: &[i8], n: usize) -> Substratification {
    assert!(eps.len() <= n, "more signs than coordinates");
    let k = eps.len();
    let pieces = if k == 0 {
        vec![ClosedPiece { index: 0, eps: vec![] }]
    } else {
        (0..k).map(|i| ClosedPiece { index: i, eps: eps.to_vec() }).collect()
    };
    let strata =
        (1u64..1 << k).map(|mask| TieStratum { tie: (0..k).filter(|b| mask & (1 << b) != 0).collect() }).collect();
    Substratification { eps: eps.to_vec(), n, pieces, strata }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_positive_signs() {
        let s = min_substratification(&[1, 1], 2);
        assert_eq!(s.pieces.len(), 2);
        assert_eq!(s.pieces_containing(&[0.2, 0.5], 0.0), vec![0]);
        assert_eq!(s.pieces_containing(&[0.5, 0.2], 0.0), vec![1]);
        assert_eq!(s.pieces_containing(&[0.3, 0.3], 0.0), vec![0, 1]);
        assert_eq!(s.strata.len(), 3);
    }

    #[test]
    fn mixed_signs_follow_the_flip() {
        let s = min_substratification(&[1, -1], 2);
        // x1 <= -x2
        assert_eq!(s.pieces_containing(&[0.2, -0.5], 0.0), vec![0]);
        assert_eq!(s.pieces_containing(&[0.5, -0.2], 0.0), vec![1]);
        assert!(s.pieces_containing(&[0.5, 0.2], 0.0).is_empty());
    }

    #[test]
    fn one_sign_is_the_half_space() {
        let s = min_substratification(&[1], 3);
        assert_eq!(s.pieces.len(), 1);
        assert!(s.pieces[0].contains_strictly(&[0.4, -3.0, 9.0], 0.0));
        let s = min_substratification(&[], 2);
        assert_eq!(s.pieces.len(), 1);
    }
}
