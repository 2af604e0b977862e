//! From boundary matrices to the homology of moduli spaces.
//!
//! Two routes compute `H_*(Par, Par')`: the one-row `E¹` page (kernels of the
//! vertical differential in top vertical degree, linked by the induced
//! horizontal maps) and the total complex. Both are read out in the grading of
//! the moduli space by duality, `H_k(Mod) = H^{3h-k}(Par, Par')`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{
    assemble_matrices, generate_basis, generate_numbered_basis, BoundaryMatrices, ComplexError, PermutableBasis,
};
use crate::exactlin::{
    betti_mod2, betti_rational, kernel_basis, snf_with, ChainComplex, ComplexReduction, HomologyGroup, LatticeSolver,
    LinError, SnfConfig, SparseIntMatrix,
};
use crate::orientation::{cover_twisted_matrices, OrientationError};

#[derive(Debug, Error)]
pub enum HomologyError {
    #[error("vertical homology at (p, q) = ({p}, {q}) is non-zero below the top row")]
    Concentration { p: usize, q: usize },
    #[error("spectral and total routes disagree in degree {degree}: {spectral} vs {total}")]
    Disagreement { degree: usize, spectral: HomologyGroup, total: HomologyGroup },
    #[error("consistency check failed: {0}")]
    Inconsistent(String),
    #[error("bad job: {0}")]
    BadJob(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Orientation(#[from] OrientationError),
    #[error(transparent)]
    Lin(#[from] LinError),
}

/// The `E¹` page: kernel bases `K_p` of `D'_{p,h}` and the maps `M_p` with
/// `K_{p-1} M_p = D''_{p,h} K_p`.
#[derive(Debug, Clone)]
pub struct E1Row {
    pub h: usize,
    pub kernels: Vec<SparseIntMatrix>,
    pub induced: Vec<SparseIntMatrix>,
}

impl E1Row {
    pub fn rank(&self, p: usize) -> usize {
        self.kernels[p].cols()
    }

    /// `K_{p}` linked by `M_p`, graded by `p`.
    pub fn row_complex(&self) -> Result<ChainComplex, LinError> {
        let dims = self.kernels.iter().map(|k| k.cols()).collect();
        let maps = (1..self.kernels.len()).map(|p| (p, self.induced[p].clone())).collect();
        ChainComplex::new(dims, maps)
    }
}

/// Checks that every vertical complex is exact over the integers below `q = h`.
fn check_concentration(mats: &BoundaryMatrices, p: usize, cfg: &SnfConfig) -> Result<(), HomologyError> {
    let h = mats.h;
    let snfs: Vec<_> = (1..=h).map(|q| snf_with(mats.dprime(p, q), false, cfg)).collect();
    let rank = |q: usize| if q == 0 || q > h { 0 } else { snfs[q - 1].rank };
    for (q, next) in snfs.iter().enumerate() {
        let free = mats.size(p, q) - rank(q) - rank(q + 1);
        let torsion = !next.torsion().is_empty();
        if free != 0 || torsion {
            return Err(HomologyError::Concentration { p, q });
        }
    }
    Ok(())
}

pub fn compute_e1(mats: &BoundaryMatrices, cfg: &SnfConfig) -> Result<E1Row, HomologyError> {
    let h = mats.h;
    let kernels: Vec<SparseIntMatrix> = (0..=2 * h)
        .into_par_iter()
        .map(|p| {
            check_concentration(mats, p, cfg)?;
            Ok(kernel_basis(mats.dprime(p, h)))
        })
        .collect::<Result<_, HomologyError>>()?;
    let induced: Vec<SparseIntMatrix> = (0..=2 * h)
        .into_par_iter()
        .map(|p| {
            if p == 0 {
                return Ok(SparseIntMatrix::zeros(0, kernels[0].cols()));
            }
            let image = mats.dsecond(p, h).mul(&kernels[p])?;
            LatticeSolver::new(&kernels[p - 1])?.solve_matrix(&image)
        })
        .collect::<Result<_, LinError>>()?;
    Ok(E1Row { h, kernels, induced })
}

/// Homology of the pair by total degree `0..=3h`, read off the `E¹` row.
pub fn compute_total_homology(e1: &E1Row, cfg: &SnfConfig) -> Result<Vec<HomologyGroup>, HomologyError> {
    let row = ComplexReduction::new(&e1.row_complex()?, cfg)?.homology();
    let mut out = vec![HomologyGroup::zero(); 3 * e1.h + 1];
    for (p, g) in row.into_iter().enumerate() {
        out[p + e1.h] = g;
    }
    Ok(out)
}

/// Homology of the pair from the total complex.
pub fn compute_total_homology_direct(
    mats: &BoundaryMatrices,
    cfg: &SnfConfig,
) -> Result<Vec<HomologyGroup>, HomologyError> {
    Ok(ComplexReduction::new(&mats.total_complex()?, cfg)?.homology())
}

/// Cohomology of the pair computed from the transposed total complex.
pub fn compute_total_cohomology_direct(
    mats: &BoundaryMatrices,
    cfg: &SnfConfig,
) -> Result<Vec<HomologyGroup>, HomologyError> {
    let mut groups = ComplexReduction::new(&mats.total_complex()?.dual(), cfg)?.homology();
    groups.reverse();
    Ok(groups)
}

/// Cohomology from homology over a complex of free modules: free ranks agree,
/// torsion moves up one degree.
pub fn cohomology_from_homology(homology: &[HomologyGroup]) -> Vec<HomologyGroup> {
    (0..homology.len())
        .map(|k| {
            let torsion = if k == 0 { Vec::new() } else { homology[k - 1].torsion.clone() };
            HomologyGroup::new(homology[k].free_rank, torsion)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coefficient {
    Z,
    Q,
    F2,
    /// Integers with the orientation twist requested explicitly.
    Twisted,
}

impl Coefficient {
    pub const ALL: [Coefficient; 4] = [Coefficient::Z, Coefficient::Q, Coefficient::F2, Coefficient::Twisted];

    pub fn tag(self) -> &'static str {
        match self {
            Coefficient::Z => "z",
            Coefficient::Q => "q",
            Coefficient::F2 => "f2",
            Coefficient::Twisted => "twisted",
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Coefficient {
    type Err = HomologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Coefficient::ALL
            .into_iter()
            .find(|c| c.tag() == s)
            .ok_or_else(|| HomologyError::BadJob(format!("unknown coefficient {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spectral,
    Total,
    /// Runs both routes and requires them to agree.
    Both,
}

impl FromStr for Method {
    type Err = HomologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spectral" => Ok(Method::Spectral),
            "total" => Ok(Method::Total),
            "both" => Ok(Method::Both),
            _ => Err(HomologyError::BadJob(format!("unknown method {s:?}"))),
        }
    }
}

/// Dimension of the moduli space with one boundary curve.
pub fn moduli_dimension(g: usize, m: usize) -> usize {
    (6 * g + 2 * m + 3).saturating_sub(6)
}

/// Homology of one moduli space. Over `Q` and `F_2` the groups only carry a
/// rank, stored as `free_rank`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuliHomology {
    pub g: usize,
    pub m: usize,
    pub permutable: bool,
    pub coeff: Coefficient,
    /// `groups[k]` is `H_k(Mod)` for `k = 0..=dim`.
    pub groups: Vec<HomologyGroup>,
    /// `H_*(Par, Par')` by total degree.
    pub pair_homology: Vec<HomologyGroup>,
    pub peak_bits: u64,
}

impl ModuliHomology {
    pub fn h(&self) -> usize {
        2 * self.g + self.m
    }

    /// Groups up to the last non-zero one.
    pub fn trimmed(&self) -> &[HomologyGroup] {
        let end = self.groups.iter().rposition(|g| !g.is_zero()).map_or(0, |k| k + 1);
        &self.groups[..end]
    }

    pub fn record(&self) -> HomologyRecord {
        HomologyRecord {
            g: self.g,
            m: self.m,
            n: 1,
            permutable: self.permutable,
            coeff: self.coeff,
            groups: self
                .groups
                .iter()
                .enumerate()
                .map(|(k, g)| DegreeRecord { k, free: g.free_rank, torsion: g.torsion.clone() })
                .collect(),
        }
    }

    /// Human-readable form of `H_k`.
    pub fn describe(&self, k: usize) -> String {
        let g = &self.groups[k];
        match self.coeff {
            Coefficient::Z | Coefficient::Twisted => g.to_string(),
            Coefficient::Q | Coefficient::F2 => {
                let field = if self.coeff == Coefficient::Q { "Q" } else { "F2" };
                match g.free_rank {
                    0 => "0".into(),
                    1 => field.into(),
                    r => format!("{field}^{r}"),
                }
            }
        }
    }
}

/// One serialized result line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyRecord {
    pub g: usize,
    pub m: usize,
    pub n: usize,
    pub permutable: bool,
    pub coeff: Coefficient,
    #[serde(rename = "H")]
    pub groups: Vec<DegreeRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeRecord {
    pub k: usize,
    pub free: usize,
    pub torsion: Vec<u64>,
}

/// Reads `H_k(Mod) = H^{3h-k}` off the cohomology of the pair and checks that
/// nothing lives outside `0..=dim`.
pub fn dualize(
    g: usize,
    m: usize,
    permutable: bool,
    coeff: Coefficient,
    pair_cohomology: &[HomologyGroup],
) -> Result<Vec<HomologyGroup>, HomologyError> {
    let h = 2 * g + m;
    let dim = moduli_dimension(g, m);
    if pair_cohomology.len() != 3 * h + 1 {
        return Err(HomologyError::Inconsistent(format!("{} cohomology degrees for h = {h}", pair_cohomology.len())));
    }
    for (j, grp) in pair_cohomology.iter().enumerate() {
        let k = 3 * h - j;
        if k > dim && !grp.is_zero() {
            return Err(HomologyError::Inconsistent(format!(
                "H_{k} = {grp} above the dimension {dim} ({coeff}, permutable = {permutable})"
            )));
        }
    }
    Ok((0..=dim).map(|k| pair_cohomology[3 * h - k].clone()).collect())
}

/// A computation request.
#[derive(Debug, Clone)]
pub struct HomologyJob {
    pub g: usize,
    pub m: usize,
    pub permutable: bool,
    pub coeff: Coefficient,
    pub method: Method,
    pub snf: SnfConfig,
}

impl HomologyJob {
    pub fn new(g: usize, m: usize) -> Self {
        HomologyJob {
            g,
            m,
            permutable: true,
            coeff: Coefficient::Z,
            method: Method::Spectral,
            snf: SnfConfig::default(),
        }
    }

    pub fn h(&self) -> usize {
        2 * self.g + self.m
    }

    /// Whether the orientation twist enters the computation.
    pub fn twisted(&self) -> bool {
        self.permutable && self.m >= 2 && self.coeff != Coefficient::F2
    }

    fn validate(&self) -> Result<(), HomologyError> {
        if self.h() == 0 {
            return Err(HomologyError::BadJob("2g + m must be positive".into()));
        }
        if self.coeff == Coefficient::Twisted && !self.permutable && self.m >= 2 {
            return Err(HomologyError::BadJob("the twist applies to permutable punctures only".into()));
        }
        Ok(())
    }
}

/// Matrices of the job's complex, twisted where the orientation requires it.
pub fn job_matrices(job: &HomologyJob) -> Result<BoundaryMatrices, HomologyError> {
    job.validate()?;
    let (h, m) = (job.h(), job.m);
    let mats = if !job.permutable {
        assemble_matrices(&generate_numbered_basis(h, m)?)?
    } else {
        let basis = generate_basis(h, m)?;
        matrices_for(job, &basis)?
    };
    Ok(mats)
}

/// Matrices of a permutable basis for the job's coefficients.
pub fn matrices_for(job: &HomologyJob, basis: &PermutableBasis) -> Result<BoundaryMatrices, HomologyError> {
    Ok(if job.twisted() { cover_twisted_matrices(basis)? } else { assemble_matrices(basis)? })
}

/// Full pipeline: basis, matrices, homology of the pair and the duality readout.
pub fn moduli_homology(job: &HomologyJob) -> Result<ModuliHomology, HomologyError> {
    let mats = job_matrices(job)?;
    moduli_homology_from(job, &mats)
}

/// Pipeline on matrices computed or loaded elsewhere.
pub fn moduli_homology_from(job: &HomologyJob, mats: &BoundaryMatrices) -> Result<ModuliHomology, HomologyError> {
    job.validate()?;
    if mats.h != job.h() {
        return Err(HomologyError::BadJob(format!("matrices for h = {}, job has h = {}", mats.h, job.h())));
    }
    mats.verify()?;
    let (pair_homology, pair_cohomology, peak_bits) = match job.coeff {
        Coefficient::Z | Coefficient::Twisted => integral_pair(job, mats)?,
        Coefficient::Q => {
            let b = betti_rational(&mats.total_complex()?);
            let groups: Vec<HomologyGroup> = b.into_iter().map(HomologyGroup::free).collect();
            (groups.clone(), groups, 0)
        }
        Coefficient::F2 => {
            let b = betti_mod2(&mats.total_complex()?);
            let groups: Vec<HomologyGroup> = b.into_iter().map(HomologyGroup::free).collect();
            (groups.clone(), groups, 0)
        }
    };
    let groups = dualize(job.g, job.m, job.permutable, job.coeff, &pair_cohomology)?;
    Ok(ModuliHomology {
        g: job.g,
        m: job.m,
        permutable: job.permutable,
        coeff: job.coeff,
        groups,
        pair_homology,
        peak_bits,
    })
}

type PairGroups = (Vec<HomologyGroup>, Vec<HomologyGroup>, u64);

fn integral_pair(job: &HomologyJob, mats: &BoundaryMatrices) -> Result<PairGroups, HomologyError> {
    let spectral = || -> Result<(Vec<HomologyGroup>, u64), HomologyError> {
        let e1 = compute_e1(mats, &job.snf)?;
        let row = ComplexReduction::new(&e1.row_complex()?, &job.snf)?;
        let mut out = vec![HomologyGroup::zero(); 3 * e1.h + 1];
        for (p, g) in row.homology().into_iter().enumerate() {
            out[p + e1.h] = g;
        }
        Ok((out, row.peak_bits()))
    };
    let total = || -> Result<(Vec<HomologyGroup>, Vec<HomologyGroup>, u64), HomologyError> {
        let red = ComplexReduction::new(&mats.total_complex()?.dual(), &job.snf)?;
        let mut coh = red.homology();
        coh.reverse();
        let hom = homology_from_cohomology(&coh);
        Ok((hom, coh, red.peak_bits()))
    };
    match job.method {
        Method::Spectral => {
            let (hom, bits) = spectral()?;
            let coh = cohomology_from_homology(&hom);
            Ok((hom, coh, bits))
        }
        Method::Total => total(),
        Method::Both => {
            let (s, t) = rayon::join(spectral, total);
            let ((hom_s, bits_s), (hom_t, coh, bits_t)) = (s?, t?);
            for (degree, (a, b)) in hom_s.iter().zip(&hom_t).enumerate() {
                if a != b {
                    return Err(HomologyError::Disagreement { degree, spectral: a.clone(), total: b.clone() });
                }
            }
            Ok((hom_t, coh, bits_s.max(bits_t)))
        }
    }
}

fn homology_from_cohomology(cohomology: &[HomologyGroup]) -> Vec<HomologyGroup> {
    (0..cohomology.len())
        .map(|k| {
            let torsion = cohomology.get(k + 1).map_or(Vec::new(), |g| g.torsion.clone());
            HomologyGroup::new(cohomology[k].free_rank, torsion)
        })
        .collect()
}

/// `Σ (−1)^{p+q} |Q_{p,q}|`.
pub fn cell_euler_characteristic(mats: &BoundaryMatrices) -> i64 {
    let h = mats.h;
    let mut chi = 0i64;
    for p in 0..=2 * h {
        for q in 0..=h {
            let s = mats.size(p, q) as i64;
            chi += if (p + q) % 2 == 0 { s } else { -s };
        }
    }
    chi
}

/// `Σ (−1)^k rank H_k`.
pub fn homology_euler_characteristic(groups: &[HomologyGroup]) -> i64 {
    groups.iter().enumerate().map(|(k, g)| if k % 2 == 0 { g.free_rank as i64 } else { -(g.free_rank as i64) }).sum()
}

/// `dim_{F_2} H_k` predicted by universal coefficients from integral homology.
pub fn mod2_from_integral(groups: &[HomologyGroup]) -> Vec<usize> {
    let even = |g: &HomologyGroup| g.torsion.iter().filter(|t| *t % 2 == 0).count();
    (0..groups.len())
        .map(|k| groups[k].free_rank + even(&groups[k]) + if k > 0 { even(&groups[k - 1]) } else { 0 })
        .collect()
}

/// Torsion orders above one, for tests and tables.
pub fn torsion_product(g: &HomologyGroup) -> BigInt {
    g.torsion.iter().fold(BigInt::one(), |acc, t| acc * BigInt::from(*t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(free: usize, torsion: &[u64]) -> HomologyGroup {
        HomologyGroup::new(free, torsion.iter().copied())
    }

    #[test]
    fn genus_one_e1_ranks() {
        let mats = assemble_matrices(&generate_basis(2, 0).unwrap()).unwrap();
        let e1 = compute_e1(&mats, &SnfConfig::default()).unwrap();
        assert_eq!((e1.rank(4), e1.rank(3), e1.rank(2)), (1, 2, 1));
        assert_eq!(e1.rank(1) + e1.rank(0), 0);
        let hom = compute_total_homology(&e1, &SnfConfig::default()).unwrap();
        let mut want = vec![HomologyGroup::zero(); 7];
        want[6] = z(1, &[]);
        want[5] = z(1, &[]);
        assert_eq!(hom, want);
        assert_eq!(compute_total_homology_direct(&mats, &SnfConfig::default()).unwrap(), want);
    }

    #[test]
    fn torus_and_punctured_torus() {
        let t = moduli_homology(&HomologyJob::new(1, 0)).unwrap();
        assert_eq!(t.trimmed(), [z(1, &[]), z(1, &[])]);
        assert_eq!(t.groups.len(), 4);
        let t1 = moduli_homology(&HomologyJob { method: Method::Both, ..HomologyJob::new(1, 1) }).unwrap();
        assert_eq!(t1.trimmed(), [z(1, &[]), z(1, &[]), z(0, &[2])]);
    }

    #[test]
    fn direct_cohomology_matches_shift() {
        let mats = assemble_matrices(&generate_basis(3, 1).unwrap()).unwrap();
        let cfg = SnfConfig::default();
        let hom = compute_total_homology_direct(&mats, &cfg).unwrap();
        assert_eq!(compute_total_cohomology_direct(&mats, &cfg).unwrap(), cohomology_from_homology(&hom));
    }

    #[test]
    fn field_coefficients_of_genus_one() {
        let q = moduli_homology(&HomologyJob { coeff: Coefficient::Q, ..HomologyJob::new(1, 1) }).unwrap();
        assert_eq!(q.groups.iter().map(|g| g.free_rank).collect::<Vec<_>>(), vec![1, 1, 0, 0, 0, 0]);
        let f = moduli_homology(&HomologyJob { coeff: Coefficient::F2, ..HomologyJob::new(1, 1) }).unwrap();
        assert_eq!(f.groups.iter().map(|g| g.free_rank).collect::<Vec<_>>(), vec![1, 1, 1, 1, 0, 0]);
        assert_eq!(f.describe(2), "F2");
    }

    #[test]
    fn record_serialization_is_stable() {
        let t = moduli_homology(&HomologyJob::new(1, 0)).unwrap();
        let line = serde_json::to_string(&t.record()).unwrap();
        assert_eq!(
            line,
            r#"{"g":1,"m":0,"n":1,"permutable":true,"coeff":"z","H":[{"k":0,"free":1,"torsion":[]},{"k":1,"free":1,"torsion":[]},{"k":2,"free":0,"torsion":[]},{"k":3,"free":0,"torsion":[]}]}"#
        );
        let back: HomologyRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, t.record());
    }

    #[test]
    fn dualize_rejects_classes_above_dimension() {
        let mut coh = vec![HomologyGroup::zero(); 4];
        coh[0] = HomologyGroup::free(1);
        assert!(dualize(0, 1, true, Coefficient::Z, &coh).is_err());
        assert_eq!(moduli_dimension(2, 0), 9);
        assert_eq!(moduli_dimension(0, 1), 0);
    }

    #[test]
    fn job_validation() {
        assert!(moduli_homology(&HomologyJob::new(0, 0)).is_err());
        let bad = HomologyJob { coeff: Coefficient::Twisted, permutable: false, ..HomologyJob::new(0, 2) };
        assert!(moduli_homology(&bad).is_err());
        assert!("zz".parse::<Coefficient>().is_err());
        assert_eq!("f2".parse::<Coefficient>().unwrap(), Coefficient::F2);
    }
}
