//! Cell bases of the quotient bicomplex and its boundary matrices.

use std::collections::BTreeMap;
use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use num_bigint::BigInt;
use rayon::prelude::*;
use thiserror::Error;

use crate::cells::{BarCell, CellError, HomCell, NumberedCell};
use crate::exactlin::{ChainComplex, LinError, SparseIntMatrix};
use crate::perm::Permutation;

/// Largest `h` the generator accepts.
pub const MAX_H: usize = 6;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("h = {h} exceeds the supported maximum {MAX_H}; {progress}")]
    ResourceLimit { h: usize, progress: String },
    #[error("h must be at least 1")]
    ZeroH,
    #[error("face {face} of {cell} is non-degenerate but missing from the basis")]
    MissingFace { cell: String, face: String },
    #[error("identity {identity} fails at bi-degree ({p}, {q})")]
    Identity { identity: &'static str, p: usize, q: usize },
    #[error(transparent)]
    Lin(#[from] LinError),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error("incidence weight: {0}")]
    Weight(String),
    #[error("cell list: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Operations the generator and assembler need from a cell type.
pub trait ComplexCell: Clone + Ord + Hash + Send + Sync + Debug + Display + FromStr<Err = CellError> + 'static {
    /// Whether this is the unnumbered (permutable punctures) variant.
    const PERMUTABLE: bool;
    fn bidegree(&self) -> (usize, usize);
    fn face_v(&self, i: usize) -> Self;
    fn face_h(&self, j: usize) -> Self;
    fn admissible(&self, h: usize, m: usize) -> bool;
    fn hom(&self) -> &HomCell;
}

impl ComplexCell for HomCell {
    const PERMUTABLE: bool = true;
    fn bidegree(&self) -> (usize, usize) {
        HomCell::bidegree(self)
    }
    fn face_v(&self, i: usize) -> Self {
        self.face_vertical(i)
    }
    fn face_h(&self, j: usize) -> Self {
        self.face_horizontal(j)
    }
    fn admissible(&self, h: usize, m: usize) -> bool {
        self.is_nondegenerate(h, m)
    }
    fn hom(&self) -> &HomCell {
        self
    }
}

impl ComplexCell for NumberedCell {
    const PERMUTABLE: bool = false;
    fn bidegree(&self) -> (usize, usize) {
        self.cell().bidegree()
    }
    fn face_v(&self, i: usize) -> Self {
        self.face_vertical(i)
    }
    fn face_h(&self, j: usize) -> Self {
        self.face_horizontal(j)
    }
    fn admissible(&self, h: usize, m: usize) -> bool {
        self.is_nondegenerate(h, m)
    }
    fn hom(&self) -> &HomCell {
        self.cell()
    }
}

/// Which boundary operator a face belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    Vertical,
    Horizontal,
}

/// Perfect matchings of `{1, …, 2h}`, each listed as pairs `(b, a)` with `b > a`,
/// sorted by the smaller letter.
pub fn matchings(h: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(letters: &[usize], acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        let Some((&a, rest)) = letters.split_first() else {
            out.push(acc.clone());
            return;
        };
        for k in 0..rest.len() {
            let b = rest[k];
            let remaining: Vec<usize> = rest.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &x)| x).collect();
            acc.push((b, a));
            rec(&remaining, acc, out);
            acc.pop();
        }
    }
    let letters: Vec<usize> = (1..=2 * h).collect();
    let mut out = Vec::new();
    rec(&letters, &mut Vec::new(), &mut out);
    out
}

/// `(2h-1)!!`
pub fn matching_count(h: usize) -> u64 {
    (1..=h as u64).map(|k| 2 * k - 1).product()
}

/// Product of the matching's transpositions with `ω_{2h}`.
pub fn matching_top_sigma(h: usize, matching: &[(usize, usize)]) -> Permutation {
    matching.iter().fold(Permutation::rotation(2 * h), |acc, &(b, a)| {
        Permutation::transposition(2 * h + 1, a, b).expect("letters in range") * acc
    })
}

/// Matchings whose product with the rotation has `m + 1` cycles.
pub fn matchings_of_type(h: usize, m: usize) -> Vec<Vec<(usize, usize)>> {
    if h == 0 || m > h || !(h - m).is_multiple_of(2) {
        return Vec::new();
    }
    matchings(h).into_iter().filter(|mt| matching_top_sigma(h, mt).ncyc() == m + 1).collect()
}

/// All ordered top cells of bi-degree `(2h, h)` with `m` punctures.
pub fn enumerate_top_cells(h: usize, m: usize) -> Vec<BarCell> {
    let mut out = Vec::new();
    for mt in matchings_of_type(h, m) {
        let taus: Vec<Permutation> =
            mt.iter().map(|&(b, a)| Permutation::transposition(2 * h + 1, a, b).expect("letters in range")).collect();
        let mut order: Vec<usize> = (0..h).collect();
        loop {
            let ordered = order.iter().map(|&k| taus[k]).collect();
            out.push(BarCell::new(2 * h, ordered).expect("degrees agree"));
            if !crate::cells::next_permutation(&mut order) {
                break;
            }
        }
    }
    out
}

/// Deterministic, sorted cell lists per bi-degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellBasis<C: ComplexCell> {
    pub h: usize,
    pub m: usize,
    pub by_bidegree: BTreeMap<(usize, usize), Vec<C>>,
}

pub type PermutableBasis = CellBasis<HomCell>;
pub type NumberedBasis = CellBasis<NumberedCell>;

impl<C: ComplexCell> CellBasis<C> {
    pub fn permutable(&self) -> bool {
        C::PERMUTABLE
    }

    pub fn cells(&self, p: usize, q: usize) -> &[C] {
        self.by_bidegree.get(&(p, q)).map_or(&[], |v| v.as_slice())
    }

    pub fn size(&self, p: usize, q: usize) -> usize {
        self.cells(p, q).len()
    }

    pub fn total(&self) -> usize {
        self.by_bidegree.values().map(|v| v.len()).sum()
    }

    /// Position of a cell in its bi-degree list.
    pub fn index_of(&self, c: &C) -> Option<((usize, usize), usize)> {
        let bd = c.bidegree();
        self.cells(bd.0, bd.1).binary_search(c).ok().map(|i| (bd, i))
    }

    /// Cell counts by dimension `p + q`.
    pub fn counts_by_dimension(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for (&(p, q), v) in &self.by_bidegree {
            *out.entry(p + q).or_insert(0) += v.len();
        }
        out
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.by_bidegree
            .iter()
            .map(|(&(p, q), v)| if (p + q) % 2 == 0 { v.len() as i64 } else { -(v.len() as i64) })
            .sum()
    }

    pub fn write_cells<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# parslit-cells v1")?;
        writeln!(w, "h={} m={} permutable={}", self.h, self.m, C::PERMUTABLE)?;
        for cells in self.by_bidegree.values() {
            for c in cells {
                writeln!(w, "{c}")?;
            }
        }
        Ok(())
    }

    pub fn read_cells<R: BufRead>(r: R) -> Result<Self, ComplexError> {
        let bad = |s: String| ComplexError::Format(s);
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| bad("empty input".into()))??;
        if header.trim() != "# parslit-cells v1" {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let conf = lines.next().ok_or_else(|| bad("missing configuration line".into()))??;
        let mut h = None;
        let mut m = None;
        let mut permutable = None;
        for tok in conf.split_whitespace() {
            match tok.split_once('=') {
                Some(("h", v)) => h = v.parse::<usize>().ok(),
                Some(("m", v)) => m = v.parse::<usize>().ok(),
                Some(("permutable", v)) => permutable = v.parse::<bool>().ok(),
                _ => return Err(bad(format!("unexpected token {tok:?}"))),
            }
        }
        let (h, m, permutable) = match (h, m, permutable) {
            (Some(h), Some(m), Some(p)) => (h, m, p),
            _ => return Err(bad(format!("bad configuration line {conf:?}"))),
        };
        if permutable != C::PERMUTABLE {
            return Err(bad(format!("file has permutable={permutable}")));
        }
        let mut by_bidegree: BTreeMap<(usize, usize), Vec<C>> = BTreeMap::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let c: C = line.parse()?;
            if !c.admissible(h, m) {
                return Err(bad(format!("degenerate cell {line:?}")));
            }
            by_bidegree.entry(c.bidegree()).or_default().push(c);
        }
        for v in by_bidegree.values() {
            if v.windows(2).any(|w| w[0] >= w[1]) {
                return Err(bad("cells not strictly sorted".into()));
            }
        }
        Ok(CellBasis { h, m, by_bidegree })
    }
}

fn check_h(h: usize) -> Result<(), ComplexError> {
    if h == 0 {
        return Err(ComplexError::ZeroH);
    }
    if h > MAX_H {
        let top: u64 = matching_count(h) * (1..=h as u64).product::<u64>();
        return Err(ComplexError::ResourceLimit {
            h,
            progress: format!("stopped before closure; {} matchings, {top} ordered top cells", matching_count(h)),
        });
    }
    Ok(())
}

/// Closes `top` (all of bi-degree `(2h, h)`) under both face operators.
fn close_under_faces<C: ComplexCell>(h: usize, m: usize, top: Vec<C>) -> CellBasis<C> {
    let mut pending: BTreeMap<(usize, usize), Vec<C>> = BTreeMap::new();
    pending.insert((2 * h, h), top);
    let mut by_bidegree = BTreeMap::new();
    // every face lowers p or q, so descending order sees each layer complete
    for p in (0..=2 * h).rev() {
        for q in (0..=h).rev() {
            let Some(mut layer) = pending.remove(&(p, q)) else { continue };
            layer.par_sort_unstable();
            layer.dedup();
            if layer.is_empty() {
                continue;
            }
            let vertical: Vec<C> = if q >= 1 {
                layer
                    .par_iter()
                    .flat_map_iter(|c| (0..=q).map(move |i| c.face_v(i)))
                    .filter(|f| f.admissible(h, m))
                    .collect()
            } else {
                Vec::new()
            };
            let horizontal: Vec<C> = if p >= 1 {
                layer
                    .par_iter()
                    .flat_map_iter(|c| (0..=p).map(move |j| c.face_h(j)))
                    .filter(|f| f.admissible(h, m))
                    .collect()
            } else {
                Vec::new()
            };
            if !vertical.is_empty() {
                pending.entry((p, q - 1)).or_default().extend(vertical);
            }
            if !horizontal.is_empty() {
                pending.entry((p - 1, q)).or_default().extend(horizontal);
            }
            by_bidegree.insert((p, q), layer);
        }
    }
    CellBasis { h, m, by_bidegree }
}

/// Basis of the quotient complex with unnumbered punctures.
pub fn generate_basis(h: usize, m: usize) -> Result<PermutableBasis, ComplexError> {
    check_h(h)?;
    let top: Vec<HomCell> = enumerate_top_cells(h, m).iter().map(BarCell::to_hom).collect();
    Ok(close_under_faces(h, m, top))
}

/// Basis of the quotient complex with numbered punctures.
pub fn generate_numbered_basis(h: usize, m: usize) -> Result<NumberedBasis, ComplexError> {
    check_h(h)?;
    let top: Vec<NumberedCell> = enumerate_top_cells(h, m).iter().flat_map(|b| b.to_hom().numberings(m)).collect();
    Ok(close_under_faces(h, m, top))
}

/// `dprime[(p, q)]: Q_{p,q} -> Q_{p,q-1}` and `dsecond[(p, q)]: Q_{p,q} -> Q_{p-1,q}`,
/// present for every bi-degree of the grid (empty blocks included).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrices {
    pub h: usize,
    pub dprime: BTreeMap<(usize, usize), SparseIntMatrix>,
    pub dsecond: BTreeMap<(usize, usize), SparseIntMatrix>,
}

impl BoundaryMatrices {
    pub fn dprime(&self, p: usize, q: usize) -> &SparseIntMatrix {
        &self.dprime[&(p, q)]
    }

    pub fn dsecond(&self, p: usize, q: usize) -> &SparseIntMatrix {
        &self.dsecond[&(p, q)]
    }

    /// Dimensions of `Q_{p,q}` read off the matrices.
    pub fn size(&self, p: usize, q: usize) -> usize {
        if q >= 1 {
            self.dprime[&(p, q)].cols()
        } else {
            self.dprime[&(p, 1)].rows()
        }
    }

    /// `D′D′ = 0`, `D″D″ = 0` and `D′D″ = D″D′`.
    pub fn verify(&self) -> Result<(), ComplexError> {
        let h = self.h;
        let jobs: Vec<(usize, usize)> = (0..=2 * h).flat_map(|p| (0..=h).map(move |q| (p, q))).collect();
        jobs.par_iter().try_for_each(|&(p, q)| {
            if q >= 2 && !self.dprime(p, q - 1).mul(self.dprime(p, q))?.is_zero() {
                return Err(ComplexError::Identity { identity: "D'D' = 0", p, q });
            }
            if p >= 2 && !self.dsecond(p - 1, q).mul(self.dsecond(p, q))?.is_zero() {
                return Err(ComplexError::Identity { identity: "D''D'' = 0", p, q });
            }
            if p >= 1 && q >= 1 {
                let a = self.dprime(p - 1, q).mul(self.dsecond(p, q))?;
                let b = self.dsecond(p, q - 1).mul(self.dprime(p, q))?;
                if a != b {
                    return Err(ComplexError::Identity { identity: "D'D'' = D''D'", p, q });
                }
            }
            Ok(())
        })
    }

    /// Applies `f` to every matrix.
    pub fn map(
        &self,
        f: impl Fn(FaceKind, (usize, usize), &SparseIntMatrix) -> SparseIntMatrix + Sync,
    ) -> BoundaryMatrices {
        BoundaryMatrices {
            h: self.h,
            dprime: self.dprime.iter().map(|(&k, m)| (k, f(FaceKind::Vertical, k, m))).collect(),
            dsecond: self.dsecond.iter().map(|(&k, m)| (k, f(FaceKind::Horizontal, k, m))).collect(),
        }
    }

    /// Total complex by dimension `n = p + q` with `∂ = ∂′ + (−1)^q ∂″`.
    /// Within a dimension the blocks are ordered by increasing `p`.
    pub fn total_complex(&self) -> Result<ChainComplex, ComplexError> {
        let h = self.h;
        let top = 3 * h;
        let offsets: Vec<BTreeMap<usize, usize>> = (0..=top)
            .map(|n| {
                let mut off = BTreeMap::new();
                let mut acc = 0;
                for p in 0..=2 * h {
                    if n >= p && n - p <= h {
                        off.insert(p, acc);
                        acc += self.size(p, n - p);
                    }
                }
                off
            })
            .collect();
        let dims: Vec<usize> = (0..=top).map(|n| offsets[n].iter().map(|(&p, _)| self.size(p, n - p)).sum()).collect();
        let mut maps = Vec::new();
        let negated: BTreeMap<(usize, usize), SparseIntMatrix> =
            self.dsecond.iter().filter(|(k, _)| k.1 % 2 == 1).map(|(&k, m)| (k, m.neg())).collect();
        for n in 1..=top {
            let mut blocks: Vec<(usize, usize, &SparseIntMatrix)> = Vec::new();
            for (&p, &col) in &offsets[n] {
                let q = n - p;
                if q >= 1 {
                    blocks.push((offsets[n - 1][&p], col, self.dprime(p, q)));
                }
                if p >= 1 {
                    let d = if q % 2 == 1 { &negated[&(p, q)] } else { self.dsecond(p, q) };
                    blocks.push((offsets[n - 1][&(p - 1)], col, d));
                }
            }
            maps.push((n, SparseIntMatrix::assemble_blocks(dims[n - 1], dims[n], &blocks)?));
        }
        Ok(ChainComplex::new(dims, maps)?)
    }
}

/// Boundary matrices with the plain signs `(−1)^i` and `(−1)^j`.
pub fn assemble_matrices<C: ComplexCell>(basis: &CellBasis<C>) -> Result<BoundaryMatrices, ComplexError> {
    assemble_matrices_weighted(basis, |_, _, _, _| Ok(1))
}

/// Like [`assemble_matrices`], with each incidence additionally multiplied by
/// `weight(kind, index, cell, face)`. A weight error aborts the assembly.
pub fn assemble_matrices_weighted<C, W>(basis: &CellBasis<C>, weight: W) -> Result<BoundaryMatrices, ComplexError>
where
    C: ComplexCell,
    W: Fn(FaceKind, usize, &C, &C) -> Result<i64, ComplexError> + Sync,
{
    let (h, m) = (basis.h, basis.m);
    let mut dprime = BTreeMap::new();
    let mut dsecond = BTreeMap::new();
    for p in 0..=2 * h {
        for q in 0..=h {
            let src = basis.cells(p, q);
            if q >= 1 {
                let dst = basis.cells(p, q - 1);
                let mat = assemble_block(src, dst, q + 1, h, m, |c, i| c.face_v(i), FaceKind::Vertical, &weight)?;
                dprime.insert((p, q), mat);
            }
            if p >= 1 {
                let dst = basis.cells(p - 1, q);
                let mat = assemble_block(src, dst, p + 1, h, m, |c, j| c.face_h(j), FaceKind::Horizontal, &weight)?;
                dsecond.insert((p, q), mat);
            }
        }
    }
    Ok(BoundaryMatrices { h, dprime, dsecond })
}

#[allow(clippy::too_many_arguments)]
fn assemble_block<C, F, W>(
    src: &[C],
    dst: &[C],
    faces: usize,
    h: usize,
    m: usize,
    face: F,
    kind: FaceKind,
    weight: &W,
) -> Result<SparseIntMatrix, ComplexError>
where
    C: ComplexCell,
    F: Fn(&C, usize) -> C + Sync,
    W: Fn(FaceKind, usize, &C, &C) -> Result<i64, ComplexError> + Sync,
{
    let columns: Vec<Vec<(usize, usize, i64)>> = src
        .par_iter()
        .enumerate()
        .map(|(col, c)| {
            let mut entries = Vec::new();
            for i in 0..faces {
                let f = face(c, i);
                if !f.admissible(h, m) {
                    continue;
                }
                let row = dst
                    .binary_search(&f)
                    .map_err(|_| ComplexError::MissingFace { cell: c.to_string(), face: f.to_string() })?;
                let sign = if i % 2 == 0 { 1 } else { -1 };
                entries.push((row, col, sign * weight(kind, i, c, &f)?));
            }
            Ok(entries)
        })
        .collect::<Result<_, ComplexError>>()?;
    let trip = columns.into_iter().flatten().map(|(r, c, v)| (r, c, BigInt::from(v)));
    Ok(SparseIntMatrix::from_triplets(dst.len(), src.len(), trip)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::fixtures::sigma;

    #[test]
    fn matching_counts() {
        for h in 1..=5 {
            assert_eq!(matchings(h).len() as u64, matching_count(h));
        }
        assert_eq!(matching_count(5), 945);
    }

    #[test]
    fn top_cells_small() {
        assert_eq!(enumerate_top_cells(1, 1).len(), 1);
        assert!(enumerate_top_cells(1, 0).is_empty());
        assert!(enumerate_top_cells(2, 1).is_empty());
        let t = enumerate_top_cells(2, 0);
        let want = [
            BarCell::from_transpositions(4, &[(4, 2), (3, 1)]).unwrap(),
            BarCell::from_transpositions(4, &[(3, 1), (4, 2)]).unwrap(),
        ];
        assert_eq!(t.len(), 2);
        for w in &want {
            assert!(t.contains(w), "{w:?} missing from {t:?}");
        }
        assert_eq!(enumerate_top_cells(4, 0).len(), 504);
    }

    #[test]
    fn torus_basis() {
        let b = generate_basis(2, 0).unwrap();
        let sizes: Vec<((usize, usize), usize)> = b.by_bidegree.iter().map(|(&k, v)| (k, v.len())).collect();
        assert_eq!(sizes, vec![((2, 2), 1), ((3, 1), 1), ((3, 2), 3), ((4, 1), 1), ((4, 2), 2)]);
        for k in 1..=8 {
            assert!(b.index_of(&sigma(k)).is_some(), "Σ{k}");
        }
    }

    #[test]
    fn torus_matrices() {
        let b = generate_basis(2, 0).unwrap();
        let mats = assemble_matrices(&b).unwrap();
        mats.verify().unwrap();
        let (_, s1) = b.index_of(&sigma(1)).unwrap();
        let (_, s3) = b.index_of(&sigma(3)).unwrap();
        let col = mats.dprime(4, 2).column(s1);
        assert_eq!(col, vec![(s3, BigInt::from(-1))]);
        assert_eq!(mats.dprime(0, 1).rows(), 0);
    }

    #[test]
    fn numbered_equals_numbering_expansion() {
        for (h, m) in [(1, 1), (2, 2), (3, 1), (3, 3)] {
            let plain = generate_basis(h, m).unwrap();
            let numbered = generate_numbered_basis(h, m).unwrap();
            for (&k, cells) in &plain.by_bidegree {
                let mut expanded: Vec<NumberedCell> = cells.iter().flat_map(|c| c.numberings(m)).collect();
                expanded.sort();
                assert_eq!(numbered.cells(k.0, k.1), expanded.as_slice(), "({h},{m}) at {k:?}");
            }
        }
    }

    #[test]
    fn cell_file_roundtrip() {
        let b = generate_basis(2, 2).unwrap();
        let mut buf = Vec::new();
        b.write_cells(&mut buf).unwrap();
        assert_eq!(PermutableBasis::read_cells(&buf[..]).unwrap(), b);
        assert!(NumberedBasis::read_cells(&buf[..]).is_err());
        let nb = generate_numbered_basis(2, 2).unwrap();
        let mut buf = Vec::new();
        nb.write_cells(&mut buf).unwrap();
        assert_eq!(NumberedBasis::read_cells(&buf[..]).unwrap(), nb);
    }

    #[test]
    fn limits() {
        assert!(matches!(generate_basis(7, 1), Err(ComplexError::ResourceLimit { h: 7, .. })));
        assert!(matches!(generate_basis(0, 0), Err(ComplexError::ZeroH)));
    }

    #[test]
    fn total_complex_squares_to_zero() {
        for (h, m) in [(2, 0), (2, 2), (3, 1)] {
            let b = generate_basis(h, m).unwrap();
            let cx = assemble_matrices(&b).unwrap().total_complex().unwrap();
            cx.check().unwrap();
            assert_eq!(cx.dims.iter().sum::<usize>(), b.total());
        }
    }
}
