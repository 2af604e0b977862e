//! Cells of the slit-domain bicomplex.
//!
//! A homogeneous cell of bi-degree `(p, q)` is a tuple `(σ_q, …, σ_0)` of
//! permutations of `{0, …, p}`. The bar form `[τ_q | … | τ_1]` has
//! `τ_k = σ_k σ_{k-1}⁻¹`. A numbered cell additionally carries the puncture
//! numbering `ν : {0, …, p} → {0, …, m}`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::perm::{PermError, Permutation, MAX_DEGREE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CellError {
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error("cell must contain at least one permutation")]
    Empty,
    #[error("permutations of a cell must share one degree")]
    MixedDegrees,
    #[error("invalid cell: {0}")]
    Invalid(String),
    #[error("cannot parse cell from {0:?}")]
    Parse(String),
}

/// Homogeneous cell. The images of `σ_q, …, σ_0` are stored back to back,
/// so the derived order is lexicographic on `(p, q, σ_q, …, σ_0)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HomCell {
    p: u8,
    q: u8,
    images: Box<[u8]>,
}

impl HomCell {
    /// `sigmas` in order `σ_q, …, σ_0`.
    pub fn new(sigmas: &[Permutation]) -> Result<Self, CellError> {
        let first = sigmas.first().ok_or(CellError::Empty)?;
        let n = first.degree();
        if sigmas.iter().any(|s| s.degree() != n) {
            return Err(CellError::MixedDegrees);
        }
        Ok(Self::from_sigmas_unchecked(sigmas))
    }

    pub(crate) fn from_sigmas_unchecked(sigmas: &[Permutation]) -> Self {
        let n = sigmas[0].degree();
        let mut images = Vec::with_capacity(n * sigmas.len());
        for s in sigmas {
            images.extend_from_slice(s.images());
        }
        HomCell { p: (n - 1) as u8, q: (sigmas.len() - 1) as u8, images: images.into_boxed_slice() }
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p as usize
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q as usize
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.p(), self.q())
    }

    pub fn dimension(&self) -> usize {
        self.p() + self.q()
    }

    /// `σ_i` for `0 ≤ i ≤ q`.
    #[inline]
    pub fn sigma(&self, i: usize) -> Permutation {
        let n = self.p() + 1;
        let slot = self.q() - i;
        Permutation::from_bytes_unchecked(&self.images[slot * n..(slot + 1) * n])
    }

    /// `σ_q, …, σ_0`.
    pub fn sigmas(&self) -> Vec<Permutation> {
        (0..=self.q()).rev().map(|i| self.sigma(i)).collect()
    }

    pub fn to_bar(&self) -> BarCell {
        let taus = (1..=self.q()).rev().map(|k| self.sigma(k) * self.sigma(k - 1).inverse()).collect();
        BarCell { p: self.p(), taus }
    }

    pub fn norm(&self) -> usize {
        (1..=self.q()).map(|k| (self.sigma(k) * self.sigma(k - 1).inverse()).word_length()).sum()
    }

    /// `∂′_i`: omit `σ_i`. Requires `q ≥ 1`.
    pub fn face_vertical(&self, i: usize) -> HomCell {
        assert!(self.q() >= 1 && i <= self.q(), "vertical face {i} of q={}", self.q());
        let n = self.p() + 1;
        let slot = self.q() - i;
        let mut images = Vec::with_capacity(self.images.len() - n);
        images.extend_from_slice(&self.images[..slot * n]);
        images.extend_from_slice(&self.images[(slot + 1) * n..]);
        HomCell { p: self.p, q: self.q - 1, images: images.into_boxed_slice() }
    }

    /// `∂″_j`: apply `D_j` to every `σ_i`. Requires `p ≥ 1`.
    pub fn face_horizontal(&self, j: usize) -> HomCell {
        assert!(self.p() >= 1 && j <= self.p(), "horizontal face {j} of p={}", self.p());
        let n = self.p() + 1;
        let mut images = Vec::with_capacity(self.images.len() - self.q() - 1);
        for slot in 0..=self.q() {
            let s = Permutation::from_bytes_unchecked(&self.images[slot * n..(slot + 1) * n]);
            images.extend_from_slice(s.delete_unchecked(j).images());
        }
        HomCell { p: self.p - 1, q: self.q, images: images.into_boxed_slice() }
    }

    /// `(genus, punctures)` of the associated surface.
    pub fn surface_invariants(&self) -> Result<(usize, usize), CellError> {
        let punctures = self.sigma(self.q()).ncyc() - 1;
        let norm = self.norm();
        if norm < punctures || !(norm - punctures).is_multiple_of(2) {
            return Err(CellError::Invalid(format!("norm {norm} and {punctures} punctures give no integral genus")));
        }
        Ok(((norm - punctures) / 2, punctures))
    }

    /// The six conditions defining the quotient complex: `norm = h`,
    /// `ncyc(σ_q) = m+1`, `σ_i(p) = 0`, `σ_0 = ω_p`, `σ_{i+1} ≠ σ_i`, and
    /// no `k < p` with `σ_i(k) = k+1` for every `i`.
    pub fn is_nondegenerate(&self, h: usize, m: usize) -> bool {
        let p = self.p();
        let q = self.q();
        let n = p + 1;
        let slot = |i: usize| &self.images[(q - i) * n..(q - i + 1) * n];
        if slot(0) != Permutation::rotation(p).images() {
            return false;
        }
        for i in 0..=q {
            if slot(i)[p] != 0 {
                return false;
            }
        }
        for i in 0..q {
            if slot(i) == slot(i + 1) {
                return false;
            }
        }
        'k: for k in 0..p {
            for i in 0..=q {
                if slot(i)[k] as usize != k + 1 {
                    continue 'k;
                }
            }
            return false;
        }
        self.sigma(q).ncyc() == m + 1 && self.norm() == h
    }

    /// All valid puncture numberings, sorted by their one-line form.
    pub fn numberings(&self, m: usize) -> Vec<NumberedCell> {
        let top = self.sigma(self.q());
        let labels = top.orbit_labels();
        let orbits = labels.iter().max().map_or(0, |&x| x + 1);
        if orbits != m + 1 || labels[0] != 0 {
            return Vec::new();
        }
        // orbit 0 contains 0 (and p, since σ_q(p) = 0 on admissible cells)
        let mut out = Vec::new();
        let mut perm: Vec<usize> = (1..=m).collect();
        loop {
            let nu: Vec<u8> = labels.iter().map(|&o| if o == 0 { 0 } else { perm[o - 1] as u8 }).collect();
            out.push(NumberedCell { cell: self.clone(), nu: nu.into_boxed_slice() });
            if !next_permutation(&mut perm) {
                break;
            }
        }
        out.sort();
        out
    }

    /// Numbering that labels the non-zero orbits of `σ_q` by increasing minimum.
    pub fn canonical_numbering(&self) -> Vec<u8> {
        self.sigma(self.q()).orbit_labels().into_iter().map(|o| o as u8).collect()
    }

    pub fn to_text(&self) -> String {
        let parts: Vec<String> = self.sigmas().iter().map(|s| s.to_one_line_string()).collect();
        format!("{} {} : {}", self.p(), self.q(), parts.join(" ; "))
    }
}

/// Lexicographic successor; returns `false` after the last permutation.
pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

impl fmt::Debug for HomCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sigmas().iter().map(|s| s.to_cycle_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl fmt::Display for HomCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for HomCell {
    type Err = CellError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, body) = s.split_once(':').ok_or_else(|| CellError::Parse(s.to_string()))?;
        let dims: Vec<usize> = head
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| CellError::Parse(s.to_string())))
            .collect::<Result<_, _>>()?;
        if dims.len() != 2 {
            return Err(CellError::Parse(s.to_string()));
        }
        let sigmas: Vec<Permutation> =
            body.split(';').map(|t| Permutation::parse_one_line(t.trim())).collect::<Result<_, _>>()?;
        let cell = HomCell::new(&sigmas)?;
        if cell.bidegree() != (dims[0], dims[1]) {
            return Err(CellError::Parse(s.to_string()));
        }
        Ok(cell)
    }
}

/// Bar form `[τ_q | … | τ_1]`, stored in that order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BarCell {
    p: usize,
    taus: Vec<Permutation>,
}

impl BarCell {
    /// `taus` listed `τ_q, …, τ_1`, each of degree `p+1`.
    pub fn new(p: usize, taus: Vec<Permutation>) -> Result<Self, CellError> {
        if p + 1 > MAX_DEGREE {
            return Err(PermError::BadDegree(p + 1).into());
        }
        if taus.iter().any(|t| t.degree() != p + 1) {
            return Err(CellError::MixedDegrees);
        }
        Ok(BarCell { p, taus })
    }

    /// Cell of `n`-letter transpositions such as `[(4 2) | (3 1)]`, listed left to right.
    pub fn from_transpositions(p: usize, pairs: &[(usize, usize)]) -> Result<Self, CellError> {
        let taus =
            pairs.iter().map(|&(a, b)| Permutation::transposition(p + 1, a, b)).collect::<Result<Vec<_>, _>>()?;
        BarCell::new(p, taus)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.taus.len()
    }

    /// `τ_q, …, τ_1`.
    pub fn taus(&self) -> &[Permutation] {
        &self.taus
    }

    /// `τ_k` for `1 ≤ k ≤ q`.
    pub fn tau(&self, k: usize) -> Permutation {
        self.taus[self.q() - k]
    }

    pub fn norm(&self) -> usize {
        self.taus.iter().map(|t| t.word_length()).sum()
    }

    pub fn to_hom(&self) -> HomCell {
        let mut s = Permutation::rotation(self.p);
        let mut sigmas = vec![s];
        for k in 1..=self.q() {
            s = self.tau(k) * s;
            sigmas.push(s);
        }
        sigmas.reverse();
        HomCell::from_sigmas_unchecked(&sigmas)
    }

    /// `τ_q ⋯ τ_1 · ω_p`, whose cycles are the boundary curve and the punctures.
    pub fn top_sigma(&self) -> Permutation {
        self.taus.iter().rev().fold(Permutation::rotation(self.p), |acc, t| *t * acc)
    }
}

impl fmt::Debug for BarCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.taus.iter().map(|t| t.to_cycle_string()).collect();
        write!(f, "[{}]", parts.join("|"))
    }
}

/// A cell together with its puncture numbering `ν`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NumberedCell {
    cell: HomCell,
    nu: Box<[u8]>,
}

impl NumberedCell {
    pub fn new(cell: HomCell, nu: Vec<u8>) -> Result<Self, CellError> {
        if nu.len() != cell.p() + 1 {
            return Err(CellError::Invalid(format!("ν has {} entries for p={}", nu.len(), cell.p())));
        }
        Ok(NumberedCell { cell, nu: nu.into_boxed_slice() })
    }

    pub fn cell(&self) -> &HomCell {
        &self.cell
    }

    pub fn nu(&self) -> &[u8] {
        &self.nu
    }

    pub fn face_vertical(&self, i: usize) -> NumberedCell {
        NumberedCell { cell: self.cell.face_vertical(i), nu: self.nu.clone() }
    }

    /// `(Δ_j ν; D_j σ_q, …, D_j σ_0)` with `Δ_j ν = ν ∘ d_j`.
    pub fn face_horizontal(&self, j: usize) -> NumberedCell {
        let nu: Vec<u8> = self.nu.iter().enumerate().filter(|&(x, _)| x != j).map(|(_, &l)| l).collect();
        NumberedCell { cell: self.cell.face_horizontal(j), nu: nu.into_boxed_slice() }
    }

    /// Conditions on `ν` (invariance, bijection on orbits, `ν(0) = ν(p) = 0`)
    /// together with non-degeneracy of the underlying cell.
    pub fn is_nondegenerate(&self, h: usize, m: usize) -> bool {
        self.numbering_is_valid(m) && self.cell.is_nondegenerate(h, m)
    }

    fn numbering_is_valid(&self, m: usize) -> bool {
        let p = self.cell.p();
        if self.nu[0] != 0 || self.nu[p] != 0 {
            return false;
        }
        let top = self.cell.sigma(self.cell.q());
        let orbit = top.orbit_labels();
        let orbits = orbit.iter().max().map_or(0, |&x| x + 1);
        if orbits != m + 1 {
            return false;
        }
        let mut label_of_orbit = vec![u8::MAX; orbits];
        for (&l, &o) in self.nu.iter().zip(&orbit).take(p + 1) {
            if l as usize > m {
                return false;
            }
            if label_of_orbit[o] == u8::MAX {
                label_of_orbit[o] = l;
            } else if label_of_orbit[o] != l {
                return false;
            }
        }
        let mut hit = vec![false; m + 1];
        for l in label_of_orbit {
            if hit[l as usize] {
                return false;
            }
            hit[l as usize] = true;
        }
        true
    }

    pub fn to_text(&self) -> String {
        let nu: Vec<String> = self.nu.iter().map(|x| x.to_string()).collect();
        format!("{} | {}", self.cell.to_text(), nu.join(","))
    }
}

impl fmt::Debug for NumberedCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}; {:?})", self.nu, self.cell)
    }
}

impl fmt::Display for NumberedCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for NumberedCell {
    type Err = CellError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (cell, nu) = s.split_once('|').ok_or_else(|| CellError::Parse(s.to_string()))?;
        let cell: HomCell = cell.trim().parse()?;
        let nu: Vec<u8> = nu
            .split(',')
            .map(|t| t.trim().parse::<u8>().map_err(|_| CellError::Parse(s.to_string())))
            .collect::<Result<_, _>>()?;
        NumberedCell::new(cell, nu)
    }
}
