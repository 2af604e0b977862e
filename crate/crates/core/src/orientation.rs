//! Fundamental class and the orientation twist.
//!
//! The homology readout for permutable punctures with `m ≥ 2` needs the
//! orientation system of the relative manifold. It is realized on incidences:
//! each cell is lifted to the numbered cover with its canonical numbering, the
//! numbering is pushed through the face, and the incidence picks up the sign of
//! the relabeling that turns the pushed numbering into the face's canonical one.
//! This is the complex of numbered cells tensored over the puncture permutations
//! with the sign representation.
//!
//! The cell sign `ε` obtained from the fundamental class via `top(·)` is also
//! provided, together with the twist multiplying every incidence by `ε(c)ε(f)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::cells::{next_permutation, BarCell, HomCell};
use crate::complex::{
    assemble_matrices, assemble_matrices_weighted, generate_basis, matchings_of_type, BoundaryMatrices, ComplexError,
    FaceKind, PermutableBasis,
};
use crate::exactlin::{kernel_basis, SparseIntMatrix};
use crate::perm::Permutation;

#[derive(Debug, Error)]
pub enum OrientationError {
    #[error("h = 2g + m must be positive")]
    ZeroH,
    #[error("fundamental cycle check failed: {0}")]
    NotACycle(String),
    #[error("top cell {0} does not occur in the fundamental cycle")]
    TopAbsent(String),
    #[error("cell {0} has no top cell")]
    NoTop(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// The bar cell `[τ_h | … | τ_1]` of `g` interlocking pairs followed by `m`
/// neighbour transpositions.
pub fn base_cell(g: usize, m: usize) -> Result<BarCell, OrientationError> {
    let h = 2 * g + m;
    if h == 0 {
        return Err(OrientationError::ZeroH);
    }
    let mut pairs = Vec::with_capacity(h);
    for b in 0..g {
        pairs.push((4 * b + 3, 4 * b + 1));
        pairs.push((4 * b + 4, 4 * b + 2));
    }
    for k in 1..=m {
        pairs.push((4 * g + 2 * k, 4 * g + 2 * k - 1));
    }
    // pairs holds τ_1, τ_2, …; bar cells list τ_h first
    pairs.reverse();
    Ok(BarCell::from_transpositions(2 * h, &pairs).expect("letters fit the degree"))
}

/// Transposition word of `a`: each cycle `(i_l … i_1 i_0)` with minimum `i_0`
/// becomes `(i_l i_{l-1}) ⋯ (i_1 i_0)`, cycles ordered by their minima with the
/// smallest rightmost. The word is read left to right: the first factor acts
/// first.
pub fn normal_form(a: &Permutation) -> Vec<Permutation> {
    let n = a.degree();
    let mut word = Vec::with_capacity(a.word_length());
    for cyc in a.cycles() {
        for w in cyc.windows(2) {
            word.push(Permutation::transposition(n, w[0], w[1]).expect("letters in range"));
        }
    }
    word
}

/// `S_j` on a transposition: letters `≥ j` move up by one.
fn spread_letter(x: usize, j: usize) -> usize {
    if x >= j {
        x + 1
    } else {
        x
    }
}

/// The top-dimensional cell `top(T)`: split each `τ_k` into the factors of its
/// normal form, then pull repeated letters apart until all transpositions are
/// disjoint. Returns `None` if the result does not land in degree `2h`.
pub fn top_cell(t: &BarCell) -> Option<BarCell> {
    // slots listed left to right, i.e. θ_h first
    let mut slots: Vec<(usize, usize)> = Vec::new();
    for tau in t.taus() {
        for f in normal_form(tau) {
            let moved: Vec<usize> = (0..f.degree()).filter(|&x| f.apply(x) != x).collect();
            slots.push((moved[1], moved[0]));
        }
    }
    let h = slots.len();
    let mut p = t.p();
    loop {
        // lowest letter used twice; slot index counted from the right, starting at 1
        let mut first_slot: BTreeMap<usize, usize> = BTreeMap::new();
        let mut repeated: Option<(usize, usize)> = None;
        for (pos, &(b, a)) in slots.iter().enumerate().rev() {
            let idx = h - pos;
            for x in [a, b] {
                match first_slot.get(&x) {
                    Some(&i1) => {
                        if repeated.is_none_or(|(k, _)| x < k) {
                            repeated = Some((x, i1));
                        }
                    }
                    None => {
                        first_slot.insert(x, idx);
                    }
                }
            }
        }
        let Some((k, i1)) = repeated else { break };
        for (pos, slot) in slots.iter_mut().enumerate() {
            let idx = h - pos;
            let j = if idx <= i1 { k + 1 } else { k };
            *slot = (spread_letter(slot.0, j), spread_letter(slot.1, j));
        }
        p += 1;
    }
    if p != 2 * h {
        return None;
    }
    BarCell::from_transpositions(p, &slots).ok()
}

/// A top-degree chain with coefficients `±1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundamentalCycle {
    pub g: usize,
    pub m: usize,
    pub terms: BTreeMap<HomCell, i8>,
}

impl FundamentalCycle {
    pub fn h(&self) -> usize {
        2 * self.g + self.m
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, c: &HomCell) -> Option<i8> {
        self.terms.get(c).copied()
    }

    /// Coefficient vector in the order of `cells`.
    pub fn vector(&self, cells: &[HomCell]) -> Vec<BigInt> {
        cells.iter().map(|c| BigInt::from(self.coefficient(c).unwrap_or(0))).collect()
    }

    /// One line per term: `<sign> <cell text>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, s) in &self.terms {
            out.push_str(if *s > 0 { "+1 " } else { "-1 " });
            out.push_str(&c.to_text());
            out.push('\n');
        }
        out
    }
}

/// `α_min`: the lexicographically least permutation of `{1, …, 2h}` carrying the
/// pairs of `from` onto the pairs of `to`.
fn least_conjugator(n: usize, from: &[(usize, usize)], to: &[(usize, usize)]) -> Permutation {
    let partner = |mt: &[(usize, usize)], x: usize| {
        mt.iter()
            .find_map(|&(b, a)| {
                if a == x {
                    Some(b)
                } else if b == x {
                    Some(a)
                } else {
                    None
                }
            })
            .expect("matched")
    };
    let mut image = vec![usize::MAX; n];
    image[0] = 0;
    let mut used = vec![false; n];
    used[0] = true;
    for l in 1..n {
        if image[l] != usize::MAX {
            continue;
        }
        let x = (1..n).find(|&x| !used[x]).expect("free letter");
        let (l2, x2) = (partner(from, l), partner(to, x));
        image[l] = x;
        image[l2] = x2;
        used[x] = true;
        used[x2] = true;
    }
    Permutation::from_images(&image).expect("bijection")
}

fn pairs_of(t: &BarCell) -> Vec<(usize, usize)> {
    t.taus()
        .iter()
        .map(|tau| {
            let moved: Vec<usize> = (0..tau.degree()).filter(|&x| tau.apply(x) != x).collect();
            (moved[1], moved[0])
        })
        .collect()
}

/// Signs `sign(π)·sign(α_min)` on all ordered top cells of type `(g, m)`.
pub fn candidate_cycle(g: usize, m: usize) -> Result<FundamentalCycle, OrientationError> {
    let base = base_cell(g, m)?;
    let h = base.q();
    let n = 2 * h + 1;
    let base_pairs = pairs_of(&base);
    let mut terms = BTreeMap::new();
    for mt in matchings_of_type(h, m) {
        let alpha = least_conjugator(n, &base_pairs, &mt);
        let conj: Vec<Permutation> = base.taus().iter().map(|t| t.conjugate_by(&alpha)).collect();
        let mut order: Vec<usize> = (0..h).collect();
        loop {
            // π.T lists τ_{π(h)}, …, τ_{π(1)}; `order` is that list as positions in `conj`
            let taus: Vec<Permutation> = order.iter().map(|&k| conj[k]).collect();
            let sign = perm_sign(&order) * alpha.sign();
            let cell = BarCell::new(2 * h, taus).expect("degrees agree").to_hom();
            terms.insert(cell, sign as i8);
            if !next_permutation(&mut order) {
                break;
            }
        }
    }
    Ok(FundamentalCycle { g, m, terms })
}

fn perm_sign(order: &[usize]) -> i32 {
    Permutation::from_images(order).expect("ordering is a bijection").sign()
}

/// Matrices in which the fundamental cycle is a cycle: plain for `m ≤ 1`, the
/// cover-signed twist otherwise.
pub fn orientation_matrices(basis: &PermutableBasis) -> Result<BoundaryMatrices, OrientationError> {
    if basis.m <= 1 {
        Ok(assemble_matrices(basis)?)
    } else {
        Ok(cover_twisted_matrices(basis)?)
    }
}

/// Checks `∂μ = 0` in the total complex; both components vanish separately
/// because they land in different bi-degrees.
pub fn verify_cycle(
    mu: &FundamentalCycle,
    basis: &PermutableBasis,
    mats: &BoundaryMatrices,
) -> Result<(), OrientationError> {
    let h = mu.h();
    let cells = basis.cells(2 * h, h);
    for c in mu.terms.keys() {
        if basis.index_of(c).is_none() {
            return Err(OrientationError::NotACycle(format!("term {c} is not a basis cell")));
        }
    }
    let v = mu.vector(cells);
    for (name, d) in [("vertical", mats.dprime(2 * h, h)), ("horizontal", mats.dsecond(2 * h, h))] {
        let image = d.mul_vec(&v).map_err(ComplexError::from)?;
        if image.iter().any(|x| !x.is_zero()) {
            return Err(OrientationError::NotACycle(format!("{name} boundary is non-zero")));
        }
    }
    Ok(())
}

/// The fundamental cycle of type `(g, m)`, normalized so the base cell has
/// coefficient `+1`. Uses the closed-form signs when they give a cycle and the
/// kernel of the top boundary otherwise.
pub fn build_fundamental_cycle(g: usize, m: usize) -> Result<FundamentalCycle, OrientationError> {
    let h = 2 * g + m;
    if h == 0 {
        return Err(OrientationError::ZeroH);
    }
    let basis = generate_basis(h, m)?;
    let mats = orientation_matrices(&basis)?;
    build_fundamental_cycle_with(g, m, &basis, &mats)
}

pub fn build_fundamental_cycle_with(
    g: usize,
    m: usize,
    basis: &PermutableBasis,
    mats: &BoundaryMatrices,
) -> Result<FundamentalCycle, OrientationError> {
    let candidate = normalize(candidate_cycle(g, m)?, g, m)?;
    if verify_cycle(&candidate, basis, mats).is_ok() {
        return Ok(candidate);
    }
    let h = 2 * g + m;
    let stacked = stack(mats.dprime(2 * h, h), mats.dsecond(2 * h, h)).map_err(ComplexError::from)?;
    let kernel = kernel_basis(&stacked);
    if kernel.cols() != 1 {
        return Err(OrientationError::NotACycle(format!("top kernel has rank {}", kernel.cols())));
    }
    let cells = basis.cells(2 * h, h);
    let mut terms = BTreeMap::new();
    for (i, c) in cells.iter().enumerate() {
        let v = kernel.get(i, 0);
        if v.is_zero() {
            continue;
        }
        if !v.abs().is_one() {
            return Err(OrientationError::NotACycle(format!("coefficient {v} at {c}")));
        }
        terms.insert(c.clone(), v.to_i8().expect("unit"));
    }
    let mu = normalize(FundamentalCycle { g, m, terms }, g, m)?;
    verify_cycle(&mu, basis, mats)?;
    Ok(mu)
}

fn normalize(mut mu: FundamentalCycle, g: usize, m: usize) -> Result<FundamentalCycle, OrientationError> {
    let base = base_cell(g, m)?.to_hom();
    match mu.coefficient(&base) {
        Some(s) if s < 0 => {
            for v in mu.terms.values_mut() {
                *v = -*v;
            }
            Ok(mu)
        }
        Some(_) => Ok(mu),
        None => Err(OrientationError::NotACycle("base cell missing".into())),
    }
}

fn stack(a: &SparseIntMatrix, b: &SparseIntMatrix) -> Result<SparseIntMatrix, crate::exactlin::LinError> {
    SparseIntMatrix::assemble_blocks(a.rows() + b.rows(), a.cols(), &[(0, 0, a), (a.rows(), 0, b)])
}

/// Cell signs `ε(c)`: the coefficient of `top(c)` in the fundamental cycle.
pub struct OrientationData {
    pub mu: FundamentalCycle,
    memo: RwLock<HashMap<HomCell, i8>>,
}

impl OrientationData {
    pub fn new(mu: FundamentalCycle) -> Self {
        OrientationData { mu, memo: RwLock::new(HashMap::new()) }
    }

    pub fn eps(&self, c: &HomCell) -> Result<i8, OrientationError> {
        if let Some(&s) = self.memo.read().expect("lock").get(c) {
            return Ok(s);
        }
        let top = top_cell(&c.to_bar()).ok_or_else(|| OrientationError::NoTop(c.to_string()))?.to_hom();
        let s = self.mu.coefficient(&top).ok_or_else(|| OrientationError::TopAbsent(top.to_string()))?;
        self.memo.write().expect("lock").insert(c.clone(), s);
        Ok(s)
    }
}

/// Multiplies every incidence between a cell and its face by `sign(c)·sign(f)`,
/// e.g. with `sign = |c| eps.eps(c)`.
pub fn twist_matrices(
    mats: &BoundaryMatrices,
    basis: &PermutableBasis,
    sign: impl Fn(&HomCell) -> Result<i8, OrientationError>,
) -> Result<BoundaryMatrices, OrientationError> {
    let mut signs: BTreeMap<(usize, usize), Vec<i8>> = BTreeMap::new();
    for (&k, cells) in &basis.by_bidegree {
        signs.insert(k, cells.iter().map(&sign).collect::<Result<_, _>>()?);
    }
    let at = |k: (usize, usize), i: usize| signs.get(&k).map_or(1, |v| v[i]) as i64;
    Ok(mats.map(|kind, (p, q), d| {
        let target = match kind {
            FaceKind::Vertical => (p, q - 1),
            FaceKind::Horizontal => (p - 1, q),
        };
        d.map_entries(|r, c, v| v * BigInt::from(at((p, q), c) * at(target, r)))
    }))
}

/// Sign of the relabeling `ρ` with `pushed = ρ ∘ canonical`.
fn relabel_sign(pushed: &[u8], canonical: &[u8], m: usize) -> Result<i64, ComplexError> {
    let mut rho = vec![usize::MAX; m + 1];
    for (&a, &b) in canonical.iter().zip(pushed) {
        let (a, b) = (a as usize, b as usize);
        if a > m || b > m {
            return Err(ComplexError::Weight(format!("label out of range in {pushed:?}")));
        }
        if rho[a] == usize::MAX {
            rho[a] = b;
        } else if rho[a] != b {
            return Err(ComplexError::Weight(format!("{pushed:?} is not constant on the orbits of {canonical:?}")));
        }
    }
    if rho[0] != 0 {
        return Err(ComplexError::Weight(format!("{pushed:?} moves the boundary label")));
    }
    let p = Permutation::from_images(&rho).map_err(|e| ComplexError::Weight(e.to_string()))?;
    Ok(p.sign() as i64)
}

/// Incidence sign from the numbered cover for a face of `cell`.
pub fn cover_sign(kind: FaceKind, index: usize, cell: &HomCell, face: &HomCell, m: usize) -> Result<i64, ComplexError> {
    let nu = cell.canonical_numbering();
    let pushed: Vec<u8> = match kind {
        FaceKind::Vertical => nu,
        FaceKind::Horizontal => nu.iter().enumerate().filter(|&(x, _)| x != index).map(|(_, &l)| l).collect(),
    };
    relabel_sign(&pushed, &face.canonical_numbering(), m)
}

/// Boundary matrices of the permutable complex with orientation coefficients.
pub fn cover_twisted_matrices(basis: &PermutableBasis) -> Result<BoundaryMatrices, ComplexError> {
    let m = basis.m;
    assemble_matrices_weighted(basis, |kind, i, c, f| cover_sign(kind, i, c, f, m))
}
