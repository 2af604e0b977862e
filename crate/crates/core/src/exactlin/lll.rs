//! Integral LLL reduction (all Gram–Schmidt data kept as exact integers).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::LinError;

/// Reduction parameter `delta = num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delta {
    pub num: u32,
    pub den: u32,
}

impl Delta {
    pub const THREE_QUARTERS: Delta = Delta { num: 3, den: 4 };

    pub fn new(num: u32, den: u32) -> Result<Delta, LinError> {
        // 1/4 < num/den < 1
        if den == 0 || 4 * num as u64 <= den as u64 || num >= den {
            return Err(LinError::BadParameter(format!("delta {num}/{den} outside (1/4, 1)")));
        }
        Ok(Delta { num, den })
    }
}

impl Default for Delta {
    fn default() -> Self {
        Delta::THREE_QUARTERS
    }
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Nearest integer to `a / b` for `b > 0`, halves rounded up.
fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    (a * &two + b).div_floor(&(b * two))
}

struct State {
    basis: Vec<Vec<BigInt>>,
    // d[0] = 1, d[k] = Gram determinant of the first k vectors
    d: Vec<BigInt>,
    // lambda[k][j] for j < k, 1-based like `d`
    lambda: Vec<Vec<BigInt>>,
}

impl State {
    fn b(&self, k: usize) -> &[BigInt] {
        &self.basis[k - 1]
    }

    fn reduce(&mut self, k: usize, l: usize) {
        let lam = &self.lambda[k][l];
        if BigInt::from(2) * lam.abs() <= self.d[l] {
            return;
        }
        let q = round_div(lam, &self.d[l]);
        let (lo, hi) = self.basis.split_at_mut(k - 1);
        let (bl, bk) = (&lo[l - 1], &mut hi[0]);
        for (x, y) in bk.iter_mut().zip(bl) {
            *x -= &q * y;
        }
        let dl = self.d[l].clone();
        self.lambda[k][l] -= &q * dl;
        for i in 1..l {
            let t = &q * &self.lambda[l][i];
            self.lambda[k][i] -= t;
        }
    }

    fn swap(&mut self, k: usize, kmax: usize) {
        self.basis.swap(k - 1, k - 2);
        for j in 1..k - 1 {
            let t = std::mem::take(&mut self.lambda[k][j]);
            self.lambda[k][j] = std::mem::replace(&mut self.lambda[k - 1][j], t);
        }
        let lam = self.lambda[k][k - 1].clone();
        let big_b = (&self.d[k - 2] * &self.d[k] + &lam * &lam) / &self.d[k - 1];
        for i in k + 1..=kmax {
            let t = self.lambda[i][k].clone();
            self.lambda[i][k] = (&self.d[k] * &self.lambda[i][k - 1] - &lam * &t) / &self.d[k - 1];
            self.lambda[i][k - 1] = (&big_b * &t + &lam * &self.lambda[i][k]) / &self.d[k];
        }
        self.d[k - 1] = big_b;
    }
}

/// LLL-reduces a basis given as a list of vectors (the lattice generated by the columns
/// of a matrix, one entry per column). Returns a reduced basis of the same lattice.
pub fn lll_reduce(columns: &[Vec<BigInt>], delta: Delta) -> Result<Vec<Vec<BigInt>>, LinError> {
    let n = columns.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let dim = columns[0].len();
    if columns.iter().any(|c| c.len() != dim) {
        return Err(LinError::Shape("lattice vectors of unequal length".into()));
    }
    let mut st = State {
        basis: columns.to_vec(),
        d: vec![BigInt::zero(); n + 1],
        lambda: vec![vec![BigInt::zero(); n + 1]; n + 1],
    };
    st.d[0] = BigInt::from(1);
    st.d[1] = dot(st.b(1), st.b(1));
    if st.d[1].is_zero() {
        return Err(LinError::Dependent);
    }
    let num = BigInt::from(delta.num);
    let den = BigInt::from(delta.den);
    let mut k = 2;
    let mut kmax = 1;
    while k <= n {
        if k > kmax {
            kmax = k;
            for j in 1..=k {
                let mut u = dot(st.b(k), st.b(j));
                for i in 1..j {
                    u = (&st.d[i] * u - &st.lambda[k][i] * &st.lambda[j][i]) / &st.d[i - 1];
                }
                if j < k {
                    st.lambda[k][j] = u;
                } else {
                    if u.is_zero() {
                        return Err(LinError::Dependent);
                    }
                    st.d[k] = u;
                }
            }
        }
        loop {
            st.reduce(k, k - 1);
            let lam = &st.lambda[k][k - 1];
            let lhs = &den * &st.d[k] * &st.d[k - 2];
            let rhs = &num * &st.d[k - 1] * &st.d[k - 1] - &den * lam * lam;
            if lhs < rhs {
                st.swap(k, kmax);
                if k > 2 {
                    k -= 1;
                }
            } else {
                for l in (1..k - 1).rev() {
                    st.reduce(k, l);
                }
                k += 1;
                break;
            }
        }
    }
    Ok(st.basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn orthogonal_basis_is_fixed() {
        let b = vec![big(&[2, 0, 0]), big(&[0, 3, 0])];
        assert_eq!(lll_reduce(&b, Delta::default()).unwrap(), b);
    }

    #[test]
    fn skewed_basis_becomes_short() {
        let k = 1_000_003;
        let b = vec![big(&[1, k]), big(&[0, 1])];
        let r = lll_reduce(&b, Delta::default()).unwrap();
        for v in &r {
            assert!(v.iter().all(|x| x.abs() <= BigInt::from(1)), "{r:?}");
        }
    }

    #[test]
    fn dependent_rejected() {
        let b = vec![big(&[1, 2]), big(&[2, 4])];
        assert!(matches!(lll_reduce(&b, Delta::default()), Err(LinError::Dependent)));
        assert!(matches!(lll_reduce(&[big(&[0, 0])], Delta::default()), Err(LinError::Dependent)));
    }

    #[test]
    fn delta_range() {
        assert!(Delta::new(1, 4).is_err());
        assert!(Delta::new(1, 1).is_err());
        assert!(Delta::new(99, 100).is_ok());
    }

    #[test]
    fn round_div_halves() {
        let r = |a: i64, b: i64| round_div(&BigInt::from(a), &BigInt::from(b));
        assert_eq!(r(5, 2), BigInt::from(3));
        assert_eq!(r(-5, 2), BigInt::from(-2));
        assert_eq!(r(7, 3), BigInt::from(2));
        assert_eq!(r(-7, 3), BigInt::from(-2));
    }
}
