//! Integer column echelon forms: primitive kernel bases and exact lattice solves.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use super::entry::{Entry, Overflow};
use super::{LinError, SparseIntMatrix};

type SparseVec<T> = Vec<(u32, T)>;

/// `x -= f * y` on sparse vectors sorted by index. Calls `born(i)` for each new index.
fn sparse_axpy<T: Entry>(
    x: &mut SparseVec<T>,
    f: &T,
    y: &SparseVec<T>,
    mut born: impl FnMut(u32),
) -> Result<(), Overflow> {
    let old = std::mem::take(x);
    let mut out = Vec::with_capacity(old.len() + y.len());
    let (mut a, mut b) = (0, 0);
    while a < old.len() || b < y.len() {
        let ia = old.get(a).map_or(u32::MAX, |e| e.0);
        let ib = y.get(b).map_or(u32::MAX, |e| e.0);
        if ia < ib {
            out.push(old[a].clone());
            a += 1;
        } else if ib < ia {
            born(ib);
            out.push((ib, T::zero().sub_mul(f, &y[b].1)?));
            b += 1;
        } else {
            let v = old[a].1.sub_mul(f, &y[b].1)?;
            if !v.is_zero() {
                out.push((ia, v));
            }
            a += 1;
            b += 1;
        }
    }
    *x = out;
    Ok(())
}

fn lookup<T>(v: &SparseVec<T>, i: usize) -> Option<&T> {
    v.binary_search_by_key(&(i as u32), |e| e.0).ok().map(|k| &v[k].1)
}

struct ColumnEchelon<T> {
    /// `(pivot row, reduced column, transform column)` in retirement order.
    retired: Vec<(usize, SparseVec<T>, SparseVec<T>)>,
    /// Transforms of the columns reduced to zero, ordered by original index.
    null: Vec<SparseVec<T>>,
}

fn column_echelon<T: Entry>(a: &SparseIntMatrix) -> Result<ColumnEchelon<T>, Overflow> {
    let n = a.cols();
    let mut cols: Vec<SparseVec<T>> = Vec::with_capacity(n);
    for c in 0..n {
        let mut col = Vec::new();
        for (r, v) in a.column(c) {
            col.push((r as u32, T::from_big(&v)?));
        }
        cols.push(col);
    }
    let one = T::from_big(&BigInt::from(1))?;
    let mut trans: Vec<SparseVec<T>> = (0..n).map(|c| vec![(c as u32, one.clone())]).collect();
    let mut active = vec![true; n];
    let mut row_index: Vec<Vec<u32>> = vec![Vec::new(); a.rows()];
    for (c, col) in cols.iter().enumerate() {
        for (r, _) in col {
            row_index[*r as usize].push(c as u32);
        }
    }
    let mut retired = Vec::new();
    for r in 0..a.rows() {
        loop {
            let mut cand = std::mem::take(&mut row_index[r]);
            cand.sort_unstable();
            cand.dedup();
            cand.retain(|&c| active[c as usize] && lookup(&cols[c as usize], r).is_some());
            if cand.is_empty() {
                break;
            }
            if cand.len() == 1 {
                let c = cand[0] as usize;
                active[c] = false;
                retired.push((r, std::mem::take(&mut cols[c]), std::mem::take(&mut trans[c])));
                break;
            }
            let weight = |c: u32| cols[c as usize].len() + trans[c as usize].len();
            let piv = *cand
                .iter()
                .min_by(|&&x, &&y| {
                    let vx = lookup(&cols[x as usize], r).expect("candidate");
                    let vy = lookup(&cols[y as usize], r).expect("candidate");
                    vx.cmp_abs(vy).then(weight(x).cmp(&weight(y))).then(x.cmp(&y))
                })
                .expect("non-empty");
            let p = piv as usize;
            let pv = lookup(&cols[p], r).expect("pivot").clone();
            let pcol = std::mem::take(&mut cols[p]);
            let ptrans = std::mem::take(&mut trans[p]);
            for &c in &cand {
                let c = c as usize;
                if c == p {
                    continue;
                }
                let q = lookup(&cols[c], r).expect("candidate").quot(&pv);
                if q.is_zero() {
                    continue;
                }
                let idx = &mut row_index;
                sparse_axpy(&mut cols[c], &q, &pcol, |i| idx[i as usize].push(c as u32))?;
                sparse_axpy(&mut trans[c], &q, &ptrans, |_| {})?;
            }
            cols[p] = pcol;
            trans[p] = ptrans;
            row_index[r] = cand;
        }
    }
    let null = (0..n).filter(|&c| active[c]).map(|c| std::mem::take(&mut trans[c])).collect();
    Ok(ColumnEchelon { retired, null })
}

fn with_restart<R>(
    a: &SparseIntMatrix,
    small: impl FnOnce(ColumnEchelon<i64>) -> R,
    large: impl FnOnce(ColumnEchelon<BigInt>) -> R,
) -> R {
    match column_echelon::<i64>(a) {
        Ok(e) => small(e),
        Err(Overflow) => large(column_echelon::<BigInt>(a).expect("bigint never overflows")),
    }
}

fn widen<T: Entry>(v: &SparseVec<T>) -> Vec<(usize, BigInt)> {
    v.iter().map(|(i, x)| (*i as usize, x.to_big())).collect()
}

/// Columns generating `ker(a)` as a direct summand of `Z^cols`.
pub fn kernel_basis(a: &SparseIntMatrix) -> SparseIntMatrix {
    let columns = with_restart(
        a,
        |e| e.null.iter().map(widen).collect::<Vec<_>>(),
        |e| e.null.iter().map(widen).collect::<Vec<_>>(),
    );
    SparseIntMatrix::from_columns(a.cols(), &columns).expect("indices in range")
}

/// Pivot row, the reduced column and its transform.
type Retired = (usize, Vec<(usize, BigInt)>, Vec<(usize, BigInt)>);

/// Solves `basis * x = v` for integral `x`, where the columns of `basis` are independent.
pub struct LatticeSolver {
    rows: usize,
    rank: usize,
    retired: Vec<Retired>,
}

impl LatticeSolver {
    pub fn new(basis: &SparseIntMatrix) -> Result<LatticeSolver, LinError> {
        let (retired, dependent) = with_restart(
            basis,
            |e| (e.retired.iter().map(|(r, c, t)| (*r, widen(c), widen(t))).collect::<Vec<_>>(), !e.null.is_empty()),
            |e| (e.retired.iter().map(|(r, c, t)| (*r, widen(c), widen(t))).collect::<Vec<_>>(), !e.null.is_empty()),
        );
        if dependent {
            return Err(LinError::Dependent);
        }
        Ok(LatticeSolver { rows: basis.rows(), rank: basis.cols(), retired })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn solve(&self, v: &[(usize, BigInt)]) -> Result<Vec<BigInt>, LinError> {
        let mut w = vec![BigInt::zero(); self.rows];
        for (i, x) in v {
            w[*i] += x;
        }
        let mut y = vec![BigInt::zero(); self.rank];
        for (r, col, t) in &self.retired {
            if w[*r].is_zero() {
                continue;
            }
            let pivot = &col.iter().find(|e| e.0 == *r).expect("pivot entry").1;
            let (x, rem) = w[*r].div_rem(pivot);
            if !rem.is_zero() {
                return Err(LinError::NotInLattice);
            }
            for (i, e) in col {
                w[*i] -= &x * e;
            }
            for (i, e) in t {
                y[*i] += &x * e;
            }
        }
        if w.iter().any(|x| !x.is_zero()) {
            return Err(LinError::NotInLattice);
        }
        Ok(y)
    }

    /// Solves column by column: returns `X` with `basis * X = b`.
    pub fn solve_matrix(&self, b: &SparseIntMatrix) -> Result<SparseIntMatrix, LinError> {
        let mut cols = Vec::with_capacity(b.cols());
        for c in 0..b.cols() {
            let y = self.solve(&b.column(c))?;
            cols.push(y.into_iter().enumerate().filter(|e| !e.1.is_zero()).collect::<Vec<_>>());
        }
        SparseIntMatrix::from_columns(self.rank, &cols)
    }
}
