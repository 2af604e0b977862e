//! Smith normal form and ranks.
//!
//! The sparse engine eliminates unit pivots first, chosen by Markowitz cost, then
//! falls back to gcd-style reduction on the smallest remaining entry. It runs on
//! checked `i64` and restarts in `BigInt` on overflow. Columns whose entries grow
//! past a bit threshold are LLL-reduced, which is a unimodular column operation and
//! leaves the elementary divisors unchanged.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::entry::{Entry, Overflow, F2};
use super::lll::{lll_reduce, Delta};
use super::SparseIntMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnfConfig {
    /// Entries wider than this many bits trigger LLL on the offending columns.
    pub lll_threshold_bits: u64,
    pub delta: Delta,
    /// Upper bound on the number of columns handed to one LLL call.
    pub lll_max_columns: usize,
}

impl Default for SnfConfig {
    fn default() -> Self {
        SnfConfig { lll_threshold_bits: 64, delta: Delta::THREE_QUARTERS, lll_max_columns: 48 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SnfStats {
    /// Widest entry (in bits) seen during elimination.
    pub peak_bits: u64,
    pub lll_calls: usize,
    pub restarted_in_bigint: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnfResult {
    /// `d_1 | d_2 | ... | d_r`, all positive.
    pub divisors: Vec<BigInt>,
    pub rank: usize,
    /// `(U, V)` with `U * A * V = diag(divisors)`, both unimodular.
    pub transforms: Option<(SparseIntMatrix, SparseIntMatrix)>,
    pub stats: SnfStats,
}

impl SnfResult {
    /// Divisors greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.divisors.iter().filter(|d| !d.is_one()).cloned().collect()
    }

    pub fn divisors_line(&self) -> String {
        let parts: Vec<String> = self.divisors.iter().map(|d| d.to_string()).collect();
        format!("divisors: {}", parts.join(","))
    }
}

pub fn snf(a: &SparseIntMatrix, want_transforms: bool) -> SnfResult {
    snf_with(a, want_transforms, &SnfConfig::default())
}

pub fn snf_with(a: &SparseIntMatrix, want_transforms: bool, cfg: &SnfConfig) -> SnfResult {
    if want_transforms {
        return dense_snf_with_transforms(a);
    }
    let (pivots, stats) = eliminate_integral(a, cfg);
    let divisors = smith_chain(pivots);
    SnfResult { rank: divisors.len(), divisors, transforms: None, stats }
}

pub fn rank_rational(a: &SparseIntMatrix) -> usize {
    eliminate_integral(a, &SnfConfig::default()).0.len()
}

pub fn rank_mod2(a: &SparseIntMatrix) -> usize {
    let rows = load_rows::<F2>(a).expect("parity never overflows");
    let mut el = Elim::new(rows, a.cols(), SnfConfig::default());
    el.run().expect("parity never overflows");
    el.pivots.len()
}

fn eliminate_integral(a: &SparseIntMatrix, cfg: &SnfConfig) -> (Vec<BigInt>, SnfStats) {
    if let Ok(rows) = load_rows::<i64>(a) {
        let mut el = Elim::new(rows, a.cols(), cfg.clone());
        if el.run().is_ok() {
            let piv = el.pivots.iter().map(|v| v.to_big().abs()).collect();
            return (piv, el.stats);
        }
    }
    let rows = load_rows::<BigInt>(a).expect("bigint never overflows");
    let mut el = Elim::new(rows, a.cols(), cfg.clone());
    el.run().expect("bigint never overflows");
    let mut stats = el.stats;
    stats.restarted_in_bigint = true;
    (el.pivots.into_iter().map(|v| v.abs()).collect(), stats)
}

fn load_rows<T: Entry>(a: &SparseIntMatrix) -> Result<Vec<Vec<(u32, T)>>, Overflow> {
    (0..a.rows())
        .map(|r| {
            let mut row = Vec::new();
            for (c, v) in a.row(r) {
                let x = T::from_big(v)?;
                if !x.is_zero() {
                    row.push((c as u32, x));
                }
            }
            Ok(row)
        })
        .collect()
}

/// Turns a multiset of diagonal entries into the divisibility chain with the same
/// elementary divisors, by repeatedly replacing pairs with `(gcd, lcm)`.
pub(crate) fn smith_chain(mut diag: Vec<BigInt>) -> Vec<BigInt> {
    let ones = diag.iter().filter(|d| d.is_one()).count();
    diag.retain(|d| !d.is_one());
    for i in 0..diag.len() {
        for j in i + 1..diag.len() {
            if (&diag[j] % &diag[i]).is_zero() {
                continue;
            }
            let g = diag[i].gcd(&diag[j]);
            let l = &diag[i] / &g * &diag[j];
            diag[i] = g;
            diag[j] = l;
        }
    }
    let mut out = vec![BigInt::one(); ones];
    diag.sort();
    out.extend(diag);
    out
}

struct Elim<T: Entry> {
    rows: Vec<Vec<(u32, T)>>,
    row_alive: Vec<bool>,
    // superset of the rows holding a non-zero in each column
    cols: Vec<Vec<u32>>,
    col_count: Vec<usize>,
    col_alive: Vec<bool>,
    heap: BinaryHeap<Reverse<(u64, u32, u32)>>,
    pivots: Vec<T>,
    stats: SnfStats,
    cfg: SnfConfig,
}

impl<T: Entry> Elim<T> {
    fn new(rows: Vec<Vec<(u32, T)>>, ncols: usize, cfg: SnfConfig) -> Self {
        let mut cols = vec![Vec::new(); ncols];
        let mut col_count = vec![0; ncols];
        let mut peak = 0;
        for (r, row) in rows.iter().enumerate() {
            for (c, v) in row {
                cols[*c as usize].push(r as u32);
                col_count[*c as usize] += 1;
                peak = peak.max(v.bits());
            }
        }
        let n = rows.len();
        let mut el = Elim {
            rows,
            row_alive: vec![true; n],
            cols,
            col_count,
            col_alive: vec![true; ncols],
            heap: BinaryHeap::new(),
            pivots: Vec::new(),
            stats: SnfStats { peak_bits: peak, ..SnfStats::default() },
            cfg,
        };
        for r in 0..n {
            el.push_units(r);
        }
        el
    }

    fn entry(&self, r: usize, c: usize) -> Option<&T> {
        let row = &self.rows[r];
        row.binary_search_by_key(&(c as u32), |e| e.0).ok().map(|k| &row[k].1)
    }

    fn cost(&self, r: usize, c: usize) -> u64 {
        (self.rows[r].len() as u64 - 1) * (self.col_count[c] as u64).saturating_sub(1)
    }

    fn push_units(&mut self, r: usize) {
        for k in 0..self.rows[r].len() {
            let (c, ref v) = self.rows[r][k];
            if v.is_unit() {
                let cost = self.cost(r, c as usize);
                self.heap.push(Reverse((cost, r as u32, c)));
            }
        }
    }

    fn pop_unit(&mut self) -> Option<(usize, usize)> {
        while let Some(Reverse((cost, r, c))) = self.heap.pop() {
            let (r, c) = (r as usize, c as usize);
            if !self.row_alive[r] || !self.col_alive[c] {
                continue;
            }
            match self.entry(r, c) {
                Some(v) if v.is_unit() => {}
                _ => continue,
            }
            let now = self.cost(r, c);
            if now > cost {
                self.heap.push(Reverse((now, r as u32, c as u32)));
                continue;
            }
            return Some((r, c));
        }
        None
    }

    /// Live rows with a non-zero in column `c`, excluding `skip`. Compacts the index.
    fn column_rows(&mut self, c: usize, skip: usize) -> Vec<usize> {
        let mut list = std::mem::take(&mut self.cols[c]);
        list.sort_unstable();
        list.dedup();
        list.retain(|&r| self.row_alive[r as usize] && self.entry(r as usize, c).is_some());
        let out = list.iter().map(|&r| r as usize).filter(|&r| r != skip).collect();
        self.cols[c] = list;
        out
    }

    /// `row[i] -= f * row[r]`
    fn axpy(&mut self, i: usize, f: &T, r: usize) -> Result<(), Overflow> {
        let old = std::mem::take(&mut self.rows[i]);
        let src = &self.rows[r];
        let mut out = Vec::with_capacity(old.len() + src.len());
        let (mut a, mut b) = (0, 0);
        while a < old.len() || b < src.len() {
            let ca = old.get(a).map_or(u32::MAX, |e| e.0);
            let cb = src.get(b).map_or(u32::MAX, |e| e.0);
            if ca < cb {
                out.push(old[a].clone());
                a += 1;
            } else if cb < ca {
                let v = T::zero().sub_mul(f, &src[b].1)?;
                self.stats.peak_bits = self.stats.peak_bits.max(v.bits());
                self.col_count[cb as usize] += 1;
                self.cols[cb as usize].push(i as u32);
                out.push((cb, v));
                b += 1;
            } else {
                let v = old[a].1.sub_mul(f, &src[b].1)?;
                if v.is_zero() {
                    self.col_count[ca as usize] -= 1;
                } else {
                    self.stats.peak_bits = self.stats.peak_bits.max(v.bits());
                    out.push((ca, v));
                }
                a += 1;
                b += 1;
            }
        }
        self.rows[i] = out;
        Ok(())
    }

    fn retire(&mut self, r: usize, c: usize) {
        let row = std::mem::take(&mut self.rows[r]);
        for (col, v) in row {
            self.col_count[col as usize] -= 1;
            if col as usize == c {
                self.pivots.push(v);
            }
        }
        self.row_alive[r] = false;
        self.col_alive[c] = false;
    }

    fn run(&mut self) -> Result<(), Overflow> {
        loop {
            if let Some((r, c)) = self.pop_unit() {
                self.unit_step(r, c)?;
                continue;
            }
            match self.smallest_entry() {
                Some((r, c, bits)) => {
                    if bits > self.cfg.lll_threshold_bits && self.lll_step()? {
                        continue;
                    }
                    self.gcd_step(r, c)?;
                }
                None => return Ok(()),
            }
        }
    }

    fn unit_step(&mut self, r: usize, c: usize) -> Result<(), Overflow> {
        let u = self.entry(r, c).expect("pivot present").clone();
        for i in self.column_rows(c, r) {
            // u is its own inverse
            let f = self.entry(i, c).expect("listed row holds the column").mul(&u)?;
            self.axpy(i, &f, r)?;
            self.push_units(i);
        }
        self.retire(r, c);
        Ok(())
    }

    /// Smallest live entry by magnitude (ties by Markowitz cost) and the widest live entry.
    fn smallest_entry(&self) -> Option<(usize, usize, u64)> {
        let mut best: Option<(usize, usize)> = None;
        let mut widest = 0;
        for r in 0..self.rows.len() {
            if !self.row_alive[r] {
                continue;
            }
            for (c, v) in &self.rows[r] {
                let c = *c as usize;
                widest = widest.max(v.bits());
                let better = match best {
                    None => true,
                    Some((br, bc)) => {
                        let bv = self.entry(br, bc).expect("current best is live");
                        match v.cmp_abs(bv) {
                            std::cmp::Ordering::Less => true,
                            std::cmp::Ordering::Equal => self.cost(r, c) < self.cost(br, bc),
                            std::cmp::Ordering::Greater => false,
                        }
                    }
                };
                if better {
                    best = Some((r, c));
                }
            }
        }
        best.map(|(r, c)| (r, c, widest))
    }

    /// Reduces around `(r, c)` until the pivot is alone in its row and column.
    fn gcd_step(&mut self, mut r: usize, mut c: usize) -> Result<(), Overflow> {
        loop {
            // column phase: row operations against row r
            loop {
                let others = self.column_rows(c, r);
                if others.is_empty() {
                    break;
                }
                let piv = self.entry(r, c).expect("pivot present").clone();
                let mut next: Option<usize> = None;
                for i in others {
                    let q = self.entry(i, c).expect("listed").quot(&piv);
                    if !q.is_zero() {
                        self.axpy(i, &q, r)?;
                    }
                    self.push_units(i);
                    if let Some(rem) = self.entry(i, c) {
                        let take = match next {
                            None => true,
                            Some(n) => rem.cmp_abs(self.entry(n, c).expect("listed")).is_lt(),
                        };
                        if take {
                            next = Some(i);
                        }
                    }
                }
                match next {
                    Some(i) => r = i,
                    None => break,
                }
            }
            // row phase: column c is now zero outside row r, so a column operation
            // against c only touches row r
            let piv = self.entry(r, c).expect("pivot present").clone();
            let old = std::mem::take(&mut self.rows[r]);
            let mut out = Vec::with_capacity(old.len());
            let mut next: Option<(u32, T)> = None;
            for (j, b) in old {
                if j as usize == c {
                    out.push((j, b));
                    continue;
                }
                let q = b.quot(&piv);
                let rem = b.sub_mul(&q, &piv)?;
                if rem.is_zero() {
                    self.col_count[j as usize] -= 1;
                    continue;
                }
                if next.as_ref().is_none_or(|(_, v)| rem.cmp_abs(v).is_lt()) {
                    next = Some((j, rem.clone()));
                }
                out.push((j, rem));
            }
            self.rows[r] = out;
            self.push_units(r);
            match next {
                Some((j, _)) => c = j as usize,
                None => break,
            }
        }
        self.retire(r, c);
        Ok(())
    }

    /// LLL on the widest live columns. Returns false when nothing could be done,
    /// in which case the threshold is raised so elimination proceeds.
    fn lll_step(&mut self) -> Result<bool, Overflow> {
        let live: Vec<usize> = (0..self.rows.len()).filter(|&r| self.row_alive[r]).collect();
        let mut col_bits: Vec<(u64, usize)> = Vec::new();
        {
            let mut widest = vec![0u64; self.col_alive.len()];
            for &r in &live {
                for (c, v) in &self.rows[r] {
                    let w = &mut widest[*c as usize];
                    *w = (*w).max(v.bits());
                }
            }
            for (c, &w) in widest.iter().enumerate() {
                if self.col_alive[c] && w > self.cfg.lll_threshold_bits / 2 {
                    col_bits.push((w, c));
                }
            }
        }
        col_bits.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let before = col_bits.first().map_or(0, |e| e.0);
        let candidates: Vec<usize> = col_bits.iter().map(|e| e.1).collect();

        // dense coordinates over the union of supports
        let mut support: Vec<usize> = Vec::new();
        for &c in &candidates {
            for r in self.column_rows(c, usize::MAX) {
                support.push(r);
            }
        }
        support.sort_unstable();
        support.dedup();
        let pos = |r: usize| support.binary_search(&r).expect("row in support");
        let mut vectors: Vec<(usize, Vec<BigInt>)> = Vec::new();
        let mut echelon = ModPEchelon::default();
        for &c in &candidates {
            if vectors.len() >= self.cfg.lll_max_columns {
                break;
            }
            let mut v = vec![BigInt::zero(); support.len()];
            for r in self.column_rows(c, usize::MAX) {
                v[pos(r)] = self.entry(r, c).expect("listed").to_big();
            }
            if echelon.insert(&v) {
                vectors.push((c, v));
            }
        }
        let raised = |s: &mut Self| {
            s.cfg.lll_threshold_bits = s.cfg.lll_threshold_bits.saturating_mul(2);
            Ok(false)
        };
        if vectors.len() < 2 {
            return raised(self);
        }
        let basis: Vec<Vec<BigInt>> = vectors.iter().map(|(_, v)| v.clone()).collect();
        let reduced = match lll_reduce(&basis, self.cfg.delta) {
            Ok(b) => b,
            Err(_) => return raised(self),
        };
        self.stats.lll_calls += 1;
        let after = reduced.iter().flatten().map(|x| x.bits()).max().unwrap_or(0);

        let chosen: Vec<u32> = {
            let mut v: Vec<u32> = vectors.iter().map(|(c, _)| *c as u32).collect();
            v.sort_unstable();
            v
        };
        for (k, &r) in support.iter().enumerate() {
            let old = std::mem::take(&mut self.rows[r]);
            let mut row: Vec<(u32, T)> = Vec::with_capacity(old.len());
            for (c, v) in old {
                if chosen.binary_search(&c).is_ok() {
                    self.col_count[c as usize] -= 1;
                } else {
                    row.push((c, v));
                }
            }
            for ((c, _), newv) in vectors.iter().zip(&reduced) {
                let x = &newv[k];
                if !x.is_zero() {
                    row.push((*c as u32, T::from_big(x)?));
                    self.col_count[*c] += 1;
                    self.cols[*c].push(r as u32);
                }
            }
            row.sort_by_key(|e| e.0);
            self.rows[r] = row;
            self.push_units(r);
        }
        if after >= before {
            self.cfg.lll_threshold_bits = self.cfg.lll_threshold_bits.saturating_mul(2);
        }
        Ok(true)
    }
}

/// Incremental echelon form modulo a large prime, used to pick columns that are
/// certainly independent over the rationals.
#[derive(Default)]
struct ModPEchelon {
    // (pivot position, normalized row)
    rows: Vec<(usize, Vec<u64>)>,
}

const MOD_P: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MOD_P as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    acc
}

impl ModPEchelon {
    fn insert(&mut self, v: &[BigInt]) -> bool {
        let p = BigInt::from(MOD_P);
        let mut w: Vec<u64> = v.iter().map(|x| x.mod_floor(&p).to_u64().expect("reduced")).collect();
        for (piv, row) in &self.rows {
            let f = w[*piv];
            if f != 0 {
                for (x, y) in w.iter_mut().zip(row) {
                    *x = (*x + MOD_P - mulmod(f, *y)) % MOD_P;
                }
            }
        }
        match w.iter().position(|&x| x != 0) {
            None => false,
            Some(piv) => {
                let inv = powmod(w[piv], MOD_P - 2);
                for x in w.iter_mut() {
                    *x = mulmod(*x, inv);
                }
                self.rows.push((piv, w));
                true
            }
        }
    }
}

/// Dense Smith form with transforms. Cost is cubic in the matrix size.
fn dense_snf_with_transforms(a: &SparseIntMatrix) -> SnfResult {
    let (m, n) = (a.rows(), a.cols());
    let mut d = a.to_dense();
    let mut u: Vec<Vec<BigInt>> = identity(m);
    let mut v: Vec<Vec<BigInt>> = identity(n);
    let mut peak = a.max_bits();
    let mut t = 0;
    while t < m.min(n) {
        // smallest non-zero in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if !d[i][j].is_zero() && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        d.swap(t, bi);
        u.swap(t, bi);
        swap_cols(&mut d, t, bj);
        swap_cols(&mut v, t, bj);
        loop {
            // move the smallest entry of row t and column t onto the diagonal
            let mut pick: Option<(usize, usize)> = None;
            let cross = (t..m).map(|i| (i, t)).chain((t + 1..n).map(|j| (t, j)));
            for (i, j) in cross {
                if !d[i][j].is_zero() && pick.is_none_or(|(pi, pj)| d[i][j].abs() < d[pi][pj].abs()) {
                    pick = Some((i, j));
                }
            }
            let Some((pi, pj)) = pick else { break };
            if pi != t {
                d.swap(t, pi);
                u.swap(t, pi);
            }
            if pj != t {
                swap_cols(&mut d, t, pj);
                swap_cols(&mut v, t, pj);
            }
            let mut dirty = false;
            for i in t + 1..m {
                if !d[i][t].is_zero() {
                    let q = nearest_quotient(&d[i][t], &d[t][t]);
                    row_axpy(&mut d, i, t, &q);
                    row_axpy(&mut u, i, t, &q);
                    dirty |= !d[i][t].is_zero();
                }
            }
            for j in t + 1..n {
                if !d[t][j].is_zero() {
                    let q = nearest_quotient(&d[t][j], &d[t][t]);
                    col_axpy(&mut d, j, t, &q);
                    col_axpy(&mut v, j, t, &q);
                    dirty |= !d[t][j].is_zero();
                }
            }
            if dirty {
                continue;
            }
            // the pivot must divide the rest of the block
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !(&d[i][j] % &d[t][t]).is_zero()));
            match bad {
                Some(i) => {
                    let one = -BigInt::one();
                    row_axpy(&mut d, t, i, &one);
                    row_axpy(&mut u, t, i, &one);
                }
                None => break,
            }
        }
        if d[t][t].is_negative() {
            for x in d[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
        for row in &d {
            for x in row {
                peak = peak.max(x.bits());
            }
        }
        t += 1;
    }
    let divisors: Vec<BigInt> = (0..t).map(|i| d[i][i].clone()).collect();
    SnfResult {
        rank: divisors.len(),
        divisors,
        transforms: Some((SparseIntMatrix::from_dense(&u), SparseIntMatrix::from_dense(&v))),
        stats: SnfStats { peak_bits: peak, ..SnfStats::default() },
    }
}

/// `round(a / b)`, so the remainder is at most `|b| / 2` in size.
fn nearest_quotient(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_mod_floor(b);
    if (&r * 2u32).abs() > b.abs() {
        q + 1
    } else {
        q
    }
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

fn swap_cols(d: &mut [Vec<BigInt>], a: usize, b: usize) {
    if a != b {
        for row in d.iter_mut() {
            row.swap(a, b);
        }
    }
}

/// `row[i] -= q * row[src]`
fn row_axpy(d: &mut [Vec<BigInt>], i: usize, src: usize, q: &BigInt) {
    let s = d[src].clone();
    for (x, y) in d[i].iter_mut().zip(&s) {
        *x -= q * y;
    }
}

/// `col[j] -= q * col[src]`
fn col_axpy(d: &mut [Vec<BigInt>], j: usize, src: usize, q: &BigInt) {
    for row in d.iter_mut() {
        let y = row[src].clone();
        row[j] -= q * y;
    }
}
