//! Permutations of `{0, …, p}` stored in one-line form.
//!
//! Cycle notation follows the slit-domain convention: a cycle sending
//! `i0 -> i1 -> … -> il -> i0` is written right to left as `(il … i1 i0)`,
//! and products are applied right to left, `(a * b)(i) = a(b(i))`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;

use thiserror::Error;

/// Largest supported degree. 20! still fits into a `u64` rank.
pub const MAX_DEGREE: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("degree {0} outside 1..={MAX_DEGREE}")]
    BadDegree(usize),
    #[error("not a bijection of 0..{0}: {1:?}")]
    NotBijective(usize, Vec<usize>),
    #[error("index {index} out of range for degree {degree}")]
    IndexOutOfRange { index: usize, degree: usize },
    #[error("rank {0} out of range")]
    RankOutOfRange(u64),
    #[error("cannot parse permutation from {0:?}")]
    Parse(String),
}

/// A bijection of `{0, …, degree-1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Permutation {
    len: u8,
    images: [u8; MAX_DEGREE],
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        assert!((1..=MAX_DEGREE).contains(&degree), "bad degree {degree}");
        let mut images = [0u8; MAX_DEGREE];
        for (i, x) in images.iter_mut().enumerate().take(degree) {
            *x = i as u8;
        }
        Permutation { len: degree as u8, images }
    }

    /// The rotation `ω_p = (p … 1 0)`, i.e. `i ↦ i+1 mod p+1`.
    pub fn rotation(p: usize) -> Self {
        let n = p + 1;
        let mut r = Self::identity(n);
        for i in 0..n {
            r.images[i] = ((i + 1) % n) as u8;
        }
        r
    }

    pub fn transposition(degree: usize, a: usize, b: usize) -> Result<Self, PermError> {
        for x in [a, b] {
            if x >= degree {
                return Err(PermError::IndexOutOfRange { index: x, degree });
            }
        }
        let mut t = Self::identity(degree);
        t.images.swap(a, b);
        Ok(t)
    }

    pub fn from_images(images: &[usize]) -> Result<Self, PermError> {
        let n = images.len();
        if !(1..=MAX_DEGREE).contains(&n) {
            return Err(PermError::BadDegree(n));
        }
        let mut seen = [false; MAX_DEGREE];
        let mut out = [0u8; MAX_DEGREE];
        for (i, &x) in images.iter().enumerate() {
            if x >= n || seen[x] {
                return Err(PermError::NotBijective(n, images.to_vec()));
            }
            seen[x] = true;
            out[i] = x as u8;
        }
        Ok(Permutation { len: n as u8, images: out })
    }

    /// Builds a permutation from raw bytes that are already known to be a bijection.
    pub(crate) fn from_bytes_unchecked(bytes: &[u8]) -> Self {
        let mut images = [0u8; MAX_DEGREE];
        images[..bytes.len()].copy_from_slice(bytes);
        Permutation { len: bytes.len() as u8, images }
    }

    /// Builds a permutation from cycles, each written in slit notation
    /// (`[il, …, i1, i0]` sends `i0 -> i1`).
    pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Self, PermError> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(PermError::BadDegree(degree));
        }
        let mut images: Vec<usize> = (0..degree).collect();
        let mut used = vec![false; degree];
        for cyc in cycles {
            for &x in cyc {
                if x >= degree {
                    return Err(PermError::IndexOutOfRange { index: x, degree });
                }
                if used[x] {
                    return Err(PermError::NotBijective(degree, cyc.clone()));
                }
                used[x] = true;
            }
            let l = cyc.len();
            for k in 0..l {
                // cyc[k] is the image of cyc[k+1]; the last entry maps to the first
                let src = cyc[(k + 1) % l];
                images[src] = cyc[k];
            }
        }
        Self::from_images(&images)
    }

    /// Parses `"3,4,1,2,0"`.
    pub fn parse_one_line(s: &str) -> Result<Self, PermError> {
        let vals: Result<Vec<usize>, _> = s.split(',').map(|t| t.trim().parse::<usize>()).collect();
        let vals = vals.map_err(|_| PermError::Parse(s.to_string()))?;
        Self::from_images(&vals)
    }

    /// Parses cycle notation such as `"(3 2)(4 1 0)"` in the given degree.
    pub fn parse_cycles(degree: usize, s: &str) -> Result<Self, PermError> {
        let mut cycles = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let open = rest.strip_prefix('(').ok_or_else(|| PermError::Parse(s.to_string()))?;
            let close = open.find(')').ok_or_else(|| PermError::Parse(s.to_string()))?;
            let body = &open[..close];
            let letters: Result<Vec<usize>, _> = body
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>())
                .collect();
            let letters = letters.map_err(|_| PermError::Parse(s.to_string()))?;
            if letters.len() > 1 {
                cycles.push(letters);
            }
            rest = open[close + 1..].trim_start();
        }
        Self::from_cycles(degree, &cycles)
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    #[inline]
    pub fn images(&self) -> &[u8] {
        &self.images[..self.len as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.images().iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    pub fn compose(&self, other: &Permutation) -> Result<Permutation, PermError> {
        if self.len != other.len {
            return Err(PermError::DegreeMismatch(self.degree(), other.degree()));
        }
        Ok(self.compose_unchecked(other))
    }

    #[inline]
    fn compose_unchecked(&self, other: &Permutation) -> Permutation {
        let mut out = *other;
        for i in 0..self.len as usize {
            out.images[i] = self.images[other.images[i] as usize];
        }
        out
    }

    pub fn inverse(&self) -> Permutation {
        let mut out = *self;
        for i in 0..self.len as usize {
            out.images[self.images[i] as usize] = i as u8;
        }
        out
    }

    /// Conjugate `g * self * g⁻¹`.
    pub fn conjugate_by(&self, g: &Permutation) -> Permutation {
        g.compose_unchecked(&self.compose_unchecked(&g.inverse()))
    }

    /// Number of orbits, fixed points included.
    pub fn ncyc(&self) -> usize {
        let n = self.degree();
        let mut seen = [false; MAX_DEGREE];
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.images[j] as usize;
            }
        }
        count
    }

    /// Transposition word length.
    pub fn word_length(&self) -> usize {
        self.degree() - self.ncyc()
    }

    /// `+1` for even, `-1` for odd permutations.
    pub fn sign(&self) -> i32 {
        if self.word_length().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Orbit representatives: for each letter, the orbit index (orbits numbered
    /// in order of their minima).
    pub fn orbit_labels(&self) -> Vec<usize> {
        let n = self.degree();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            let mut j = start;
            while label[j] == usize::MAX {
                label[j] = next;
                j = self.images[j] as usize;
            }
            next += 1;
        }
        label
    }

    /// All cycles (fixed points included), each listed in slit notation with its
    /// minimum last, cycles ordered by decreasing minimum.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = [false; MAX_DEGREE];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            // walk i0 -> i1 -> ..., then reverse to get (il … i1 i0)
            let mut orbit = Vec::new();
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                orbit.push(j);
                j = self.images[j] as usize;
            }
            orbit.reverse();
            out.push(orbit);
        }
        out.reverse();
        out
    }

    /// Cycle notation without fixed points, e.g. `(3 2)(4 1 0)`; `()` for the identity.
    pub fn to_cycle_string(&self) -> String {
        let parts: Vec<String> = self
            .cycles()
            .into_iter()
            .filter(|c| c.len() > 1)
            .map(|c| {
                let letters: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                format!("({})", letters.join(" "))
            })
            .collect();
        if parts.is_empty() {
            "()".to_string()
        } else {
            parts.concat()
        }
    }

    pub fn to_one_line_string(&self) -> String {
        let v: Vec<String> = self.images().iter().map(|x| x.to_string()).collect();
        v.join(",")
    }

    /// Deletes the letter `j` from its cycle and renormalizes,
    /// `D_j(α) = s_j ∘ (α(j), j) ∘ α ∘ d_j`.
    pub fn delete(&self, j: usize) -> Result<Permutation, PermError> {
        let n = self.degree();
        if j >= n {
            return Err(PermError::IndexOutOfRange { index: j, degree: n });
        }
        if n < 2 {
            return Err(PermError::BadDegree(n - 1));
        }
        Ok(self.delete_unchecked(j))
    }

    #[inline]
    pub(crate) fn delete_unchecked(&self, j: usize) -> Permutation {
        let n = self.len as usize;
        let jj = j as u8;
        let succ = self.images[j];
        let mut out = Permutation { len: (n - 1) as u8, images: [0u8; MAX_DEGREE] };
        for x in 0..n - 1 {
            let y = if x < j { x } else { x + 1 };
            let mut v = self.images[y];
            if v == jj {
                v = succ;
            }
            out.images[x] = if v < jj { v } else { v - 1 };
        }
        out
    }

    /// Inserts a new fixed point `j`, shifting letters `k ≥ j` up by one.
    pub fn insert(&self, j: usize) -> Result<Permutation, PermError> {
        let n = self.degree();
        if j > n {
            return Err(PermError::IndexOutOfRange { index: j, degree: n + 1 });
        }
        if n + 1 > MAX_DEGREE {
            return Err(PermError::BadDegree(n + 1));
        }
        let up = |x: u8| if (x as usize) < j { x } else { x + 1 };
        let mut out = Permutation { len: (n + 1) as u8, images: [0u8; MAX_DEGREE] };
        for x in 0..=n {
            out.images[x] = if x == j {
                j as u8
            } else {
                let src = if x < j { x } else { x - 1 };
                up(self.images[src])
            };
        }
        Ok(out)
    }

    /// Lehmer-code rank in `0..degree!`.
    pub fn rank(&self) -> u64 {
        let n = self.degree();
        let mut rank = 0u64;
        for i in 0..n {
            let smaller_after = self.images[i + 1..n].iter().filter(|&&x| x < self.images[i]).count() as u64;
            rank = rank * (n - i) as u64 + smaller_after;
        }
        rank
    }

    pub fn from_rank(degree: usize, mut rank: u64) -> Result<Permutation, PermError> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(PermError::BadDegree(degree));
        }
        let total: u64 = (1..=degree as u64).product();
        if rank >= total {
            return Err(PermError::RankOutOfRange(rank));
        }
        let mut digits = vec![0usize; degree];
        for i in (0..degree).rev() {
            let base = (degree - i) as u64;
            digits[i] = (rank % base) as usize;
            rank /= base;
        }
        let mut pool: Vec<usize> = (0..degree).collect();
        let images: Vec<usize> = digits.iter().map(|&d| pool.remove(d)).collect();
        Permutation::from_images(&images)
    }
}

impl Mul for Permutation {
    type Output = Permutation;

    /// Panics on degree mismatch; use [`Permutation::compose`] for a checked product.
    fn mul(self, rhs: Permutation) -> Permutation {
        assert_eq!(self.len, rhs.len, "degree mismatch in permutation product");
        self.compose_unchecked(&rhs)
    }
}

impl<'a> Mul<&'a Permutation> for &'a Permutation {
    type Output = Permutation;

    fn mul(self, rhs: &'a Permutation) -> Permutation {
        assert_eq!(self.len, rhs.len, "degree mismatch in permutation product");
        self.compose_unchecked(rhs)
    }
}

impl PartialOrd for Permutation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Permutation {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len.cmp(&other.len).then_with(|| self.images().cmp(other.images()))
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_cycle_string())
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_one_line_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{HashSet, VecDeque};

    fn cyc(n: usize, s: &str) -> Permutation {
        Permutation::parse_cycles(n, s).unwrap()
    }

    #[test]
    fn compose_examples() {
        let s = cyc(5, "(3 2)(4 1 0)");
        let id = Permutation::identity(5);
        assert_eq!(id.compose(&s).unwrap(), s);
        assert!(s.compose(&s.inverse()).unwrap().is_identity());
        let ab = cyc(5, "(3 1)").compose(&cyc(5, "(4 2)")).unwrap();
        assert_eq!(ab.images(), &[0, 3, 4, 1, 2]);
        assert!(id.compose(&Permutation::identity(4)).is_err());
    }

    #[test]
    fn slit_cycle_convention() {
        // (4 1 2 3 0) sends 0->3->2->1->4->0
        let s = cyc(5, "(4 1 2 3 0)");
        assert_eq!(s.to_one_line_string(), "3,4,1,2,0");
        assert_eq!(Permutation::rotation(4), cyc(5, "(4 3 2 1 0)"));
        assert_eq!(s.to_cycle_string(), "(4 1 2 3 0)");
        assert_eq!(cyc(5, "(4 1 0)(3 2)").to_cycle_string(), "(3 2)(4 1 0)");
    }

    #[test]
    fn ncyc_and_length() {
        assert_eq!(Permutation::identity(5).ncyc(), 5);
        assert_eq!(Permutation::rotation(4).ncyc(), 1);
        assert_eq!(cyc(5, "(3 2)(4 1 0)").ncyc(), 2);
        assert_eq!(Permutation::identity(5).word_length(), 0);
        assert_eq!(cyc(5, "(4 0)").word_length(), 1);
        assert_eq!(Permutation::rotation(4).word_length(), 4);
    }

    fn bfs_lengths(n: usize) -> Vec<(Permutation, usize)> {
        let id = Permutation::identity(n);
        let mut dist = vec![(id, 0usize)];
        let mut seen: HashSet<Permutation> = HashSet::from([id]);
        let mut queue = VecDeque::from([(id, 0usize)]);
        while let Some((p, d)) = queue.pop_front() {
            for a in 0..n {
                for b in a + 1..n {
                    let t = Permutation::transposition(n, a, b).unwrap();
                    let next = t * p;
                    if seen.insert(next) {
                        dist.push((next, d + 1));
                        queue.push_back((next, d + 1));
                    }
                }
            }
        }
        dist
    }

    #[test]
    fn word_length_matches_cayley_bfs() {
        for n in 1..=6 {
            let dist = bfs_lengths(n);
            assert_eq!(dist.len(), (1..=n).product::<usize>());
            for (p, d) in dist {
                assert_eq!(p.word_length(), d, "{p:?}");
            }
        }
    }

    #[test]
    fn delete_examples() {
        for p in 1..6 {
            for j in 0..=p {
                assert!(Permutation::identity(p + 1).delete(j).unwrap().is_identity());
                assert_eq!(Permutation::rotation(p).delete(j).unwrap(), Permutation::rotation(p - 1));
            }
        }
        assert_eq!(Permutation::rotation(4).delete(2).unwrap(), Permutation::rotation(3));
        assert_eq!(cyc(5, "(3 2)(4 1 0)").delete(0).unwrap(), cyc(4, "(2 1)(3 0)"));
        assert!(Permutation::identity(3).delete(3).is_err());
    }

    #[test]
    fn delete_matches_composite_formula() {
        // D_j(α) = s_j ∘ (α(j), j) ∘ α ∘ d_j evaluated pointwise
        let a = cyc(6, "(5 2 0)(4 1)");
        for j in 0..6 {
            let t = Permutation::transposition(6, a.apply(j), j).unwrap_or(Permutation::identity(6));
            let d = a.delete(j).unwrap();
            for x in 0..5 {
                let y = if x < j { x } else { x + 1 };
                let v = t.apply(a.apply(y));
                let v = if v <= j { v } else { v - 1 };
                assert_eq!(d.apply(x), v);
            }
        }
    }

    #[test]
    fn insert_examples() {
        assert!(Permutation::identity(3).insert(1).unwrap().is_identity());
        assert_eq!(cyc(3, "(2 1)").insert(1).unwrap(), cyc(4, "(3 2)"));
        let t = cyc(5, "(4 1)");
        for j in 0..=5 {
            let s = t.insert(j).unwrap();
            let up = |x: usize| if x < j { x } else { x + 1 };
            assert_eq!(s, Permutation::transposition(6, up(4), up(1)).unwrap());
            assert_eq!(s.apply(j), j);
        }
        assert!(t.insert(6).is_err());
    }

    #[test]
    fn lehmer_rank_roundtrip() {
        assert_eq!(Permutation::identity(4).rank(), 0);
        let rev = Permutation::from_images(&[3, 2, 1, 0]).unwrap();
        assert_eq!(rev.rank(), 23);
        for r in 0..120 {
            assert_eq!(Permutation::from_rank(5, r).unwrap().rank(), r);
        }
        assert!(Permutation::from_rank(3, 6).is_err());
    }

    #[test]
    fn parse_errors() {
        assert!(Permutation::parse_one_line("0,0,1").is_err());
        assert!(Permutation::parse_one_line("a,b").is_err());
        assert!(Permutation::parse_cycles(3, "(3 1)").is_err());
        assert!(Permutation::parse_cycles(3, "(1 2").is_err());
    }
}
