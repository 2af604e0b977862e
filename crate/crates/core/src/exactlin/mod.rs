//! Exact sparse integer linear algebra.

mod entry;
mod kernel;
mod lll;
mod matrix;
mod snf;

use std::fmt;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use kernel::{kernel_basis, LatticeSolver};
pub use lll::{lll_reduce, Delta};
pub use matrix::SparseIntMatrix;
pub use snf::{rank_mod2, rank_rational, snf, snf_with, SnfConfig, SnfResult, SnfStats};

#[derive(Debug, thiserror::Error)]
pub enum LinError {
    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    OutOfBounds { row: usize, col: usize, rows: usize, cols: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix text format: {0}")]
    Format(String),
    #[error("linearly dependent vectors")]
    Dependent,
    #[error("vector is not in the lattice")]
    NotInLattice,
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("d_{k} * d_{} is not zero", k + 1)]
    NotAComplex { k: usize },
}

/// A finitely generated abelian group `Z^free + Z/t_1 + ... + Z/t_s` with `t_i | t_{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct HomologyGroup {
    pub free_rank: usize,
    pub torsion: Vec<u64>,
}

impl HomologyGroup {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn free(rank: usize) -> Self {
        HomologyGroup { free_rank: rank, torsion: Vec::new() }
    }

    /// Divisors equal to one are dropped; the rest must already form a chain.
    pub fn new(free_rank: usize, torsion: impl IntoIterator<Item = u64>) -> Self {
        let torsion: Vec<u64> = torsion.into_iter().filter(|&t| t > 1).collect();
        debug_assert!(torsion.windows(2).all(|w| w[1] % w[0] == 0), "torsion {torsion:?} not chained");
        HomologyGroup { free_rank, torsion }
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// Dimension after tensoring with F_2.
    pub fn dim_mod2(&self) -> usize {
        self.free_rank + self.torsion.iter().filter(|t| *t % 2 == 0).count()
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        let mut i = 0;
        while i < self.torsion.len() {
            let t = self.torsion[i];
            let run = self.torsion[i..].iter().take_while(|&&x| x == t).count();
            parts.push(if run == 1 { format!("Z/{t}") } else { format!("(Z/{t})^{run}") });
            i += run;
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

fn to_u64(d: &BigInt) -> u64 {
    u64::try_from(d).expect("torsion coefficient fits in 64 bits")
}

/// A chain complex `C_k` with `boundaries[k]: C_k -> C_{k-1}`; `boundaries[0]` maps to nothing.
#[derive(Debug, Clone)]
pub struct ChainComplex {
    pub dims: Vec<usize>,
    pub boundaries: Vec<SparseIntMatrix>,
}

impl ChainComplex {
    /// Complex with the given group ranks; `maps[k]` is `d_k` for `k >= 1`.
    pub fn new(dims: Vec<usize>, maps: Vec<(usize, SparseIntMatrix)>) -> Result<ChainComplex, LinError> {
        let mut boundaries: Vec<SparseIntMatrix> =
            (0..dims.len()).map(|k| SparseIntMatrix::zeros(if k == 0 { 0 } else { dims[k - 1] }, dims[k])).collect();
        for (k, d) in maps {
            if k == 0 || k >= dims.len() || d.rows() != dims[k - 1] || d.cols() != dims[k] {
                return Err(LinError::Shape(format!(
                    "d_{k} is {}x{} in a complex with ranks {dims:?}",
                    d.rows(),
                    d.cols()
                )));
            }
            boundaries[k] = d;
        }
        Ok(ChainComplex { dims, boundaries })
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Verifies `d_k * d_{k+1} = 0`, reporting the first failing `k`.
    pub fn check(&self) -> Result<(), LinError> {
        (1..self.len().saturating_sub(1)).into_par_iter().try_for_each(|k| {
            let prod = self.boundaries[k].mul(&self.boundaries[k + 1])?;
            if prod.is_zero() {
                Ok(())
            } else {
                Err(LinError::NotAComplex { k })
            }
        })
    }

    /// The cochain complex read as a chain complex: degree `j` holds `C^{n-1-j}`
    /// where `n` is the number of degrees.
    pub fn dual(&self) -> ChainComplex {
        let n = self.len();
        let dims: Vec<usize> = (0..n).map(|j| self.dims[n - 1 - j]).collect();
        let boundaries = (0..n)
            .map(|j| if j == 0 { SparseIntMatrix::zeros(0, dims[0]) } else { self.boundaries[n - j].transpose() })
            .collect();
        ChainComplex { dims, boundaries }
    }
}

/// Elimination data of every differential, computed in parallel.
pub struct ComplexReduction {
    pub dims: Vec<usize>,
    pub snf: Vec<SnfResult>,
}

impl ComplexReduction {
    pub fn new(cx: &ChainComplex, cfg: &SnfConfig) -> Result<ComplexReduction, LinError> {
        cx.check()?;
        let snf = cx.boundaries.par_iter().map(|d| snf_with(d, false, cfg)).collect();
        Ok(ComplexReduction { dims: cx.dims.clone(), snf })
    }

    fn rank(&self, k: usize) -> usize {
        self.snf.get(k).map_or(0, |r| r.rank)
    }

    pub fn homology(&self) -> Vec<HomologyGroup> {
        (0..self.dims.len())
            .map(|k| {
                let free = self.dims[k] - self.rank(k) - self.rank(k + 1);
                let torsion = self.snf.get(k + 1).map_or(Vec::new(), |r| r.torsion().iter().map(to_u64).collect());
                HomologyGroup::new(free, torsion)
            })
            .collect()
    }

    /// `H^k`: same free part, torsion shifted up one degree.
    pub fn cohomology(&self) -> Vec<HomologyGroup> {
        let h = self.homology();
        (0..h.len())
            .map(|k| {
                let torsion = if k == 0 { Vec::new() } else { h[k - 1].torsion.clone() };
                HomologyGroup::new(h[k].free_rank, torsion)
            })
            .collect()
    }

    pub fn peak_bits(&self) -> u64 {
        self.snf.iter().map(|r| r.stats.peak_bits).max().unwrap_or(0)
    }
}

pub fn homology_of_complex(cx: &ChainComplex) -> Result<Vec<HomologyGroup>, LinError> {
    Ok(ComplexReduction::new(cx, &SnfConfig::default())?.homology())
}

pub fn cohomology_of_complex(cx: &ChainComplex) -> Result<Vec<HomologyGroup>, LinError> {
    Ok(ComplexReduction::new(cx, &SnfConfig::default())?.cohomology())
}

/// Betti numbers over Q.
pub fn betti_rational(cx: &ChainComplex) -> Vec<usize> {
    let ranks: Vec<usize> = cx.boundaries.par_iter().map(rank_rational).collect();
    (0..cx.len()).map(|k| cx.dims[k] - ranks[k] - ranks.get(k + 1).copied().unwrap_or(0)).collect()
}

/// Betti numbers over F_2.
pub fn betti_mod2(cx: &ChainComplex) -> Vec<usize> {
    let ranks: Vec<usize> = cx.boundaries.par_iter().map(rank_mod2).collect();
    (0..cx.len()).map(|k| cx.dims[k] - ranks[k] - ranks.get(k + 1).copied().unwrap_or(0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplication_by_two() {
        let d1 = SparseIntMatrix::from_dense(&[vec![2]]);
        let cx = ChainComplex::new(vec![1, 1], vec![(1, d1)]).unwrap();
        let h = homology_of_complex(&cx).unwrap();
        assert_eq!(h, vec![HomologyGroup::new(0, [2]), HomologyGroup::zero()]);
        let c = cohomology_of_complex(&cx).unwrap();
        assert_eq!(c, vec![HomologyGroup::zero(), HomologyGroup::new(0, [2])]);
        assert_eq!(homology_of_complex(&cx.dual()).unwrap(), vec![HomologyGroup::new(0, [2]), HomologyGroup::zero()]);
        assert_eq!(betti_mod2(&cx), vec![1, 1]);
        assert_eq!(betti_rational(&cx), vec![0, 0]);
    }

    #[test]
    fn zero_differentials() {
        let cx = ChainComplex::new(vec![2, 0, 3], vec![]).unwrap();
        let h = homology_of_complex(&cx).unwrap();
        assert_eq!(h, vec![HomologyGroup::free(2), HomologyGroup::zero(), HomologyGroup::free(3)]);
    }

    #[test]
    fn non_complex_reported() {
        let d1 = SparseIntMatrix::from_dense(&[vec![1]]);
        let d2 = SparseIntMatrix::from_dense(&[vec![1]]);
        let cx = ChainComplex::new(vec![1, 1, 1], vec![(1, d1), (2, d2)]).unwrap();
        assert!(matches!(homology_of_complex(&cx), Err(LinError::NotAComplex { k: 1 })));
        assert!(ChainComplex::new(vec![1, 1], vec![(1, SparseIntMatrix::zeros(2, 1))]).is_err());
    }

    #[test]
    fn display() {
        assert_eq!(HomologyGroup::zero().to_string(), "0");
        assert_eq!(HomologyGroup::new(1, [2, 2, 6]).to_string(), "Z + (Z/2)^2 + Z/6");
        assert_eq!(HomologyGroup::new(3, []).to_string(), "Z^3");
        assert_eq!(HomologyGroup::new(1, [2]).dim_mod2(), 2);
    }
}
