use std::io::{self, BufRead, Write};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::LinError;

/// Exact sparse integer matrix.
///
/// Entries live in compressed rows sorted by column. A compressed column
/// pattern (row positions of the non-zeros per column) is kept alongside,
/// since eliminations need both access directions.
#[derive(Clone, PartialEq, Eq)]
pub struct SparseIntMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<BigInt>,
    col_ptr: Vec<usize>,
    row_idx: Vec<u32>,
}

impl SparseIntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_sorted_rows(rows, cols, vec![Vec::new(); rows])
    }

    pub fn identity(n: usize) -> Self {
        Self::from_sorted_rows(n, n, (0..n).map(|i| vec![(i as u32, BigInt::one())]).collect())
    }

    /// Duplicate positions are summed; zeros are dropped.
    pub fn from_triplets<I, V>(rows: usize, cols: usize, triplets: I) -> Result<Self, LinError>
    where
        I: IntoIterator<Item = (usize, usize, V)>,
        V: Into<BigInt>,
    {
        let mut by_row: Vec<Vec<(u32, BigInt)>> = vec![Vec::new(); rows];
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(LinError::OutOfBounds { row: r, col: c, rows, cols });
            }
            by_row[r].push((c as u32, v.into()));
        }
        for row in by_row.iter_mut() {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(u32, BigInt)> = Vec::with_capacity(row.len());
            for (c, v) in row.drain(..) {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|e| !e.1.is_zero());
            *row = merged;
        }
        Ok(Self::from_sorted_rows(rows, cols, by_row))
    }

    pub fn from_dense<V: Clone + Into<BigInt>>(dense: &[Vec<V>]) -> Self {
        let rows = dense.len();
        let cols = dense.first().map_or(0, |r| r.len());
        let trip = dense
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, v)| (i, j, v.clone().into())));
        Self::from_triplets::<_, BigInt>(rows, cols, trip).expect("dense input is in bounds")
    }

    /// Rows must be sorted by column with no zero or repeated entries.
    pub(crate) fn from_sorted_rows(rows: usize, cols: usize, data: Vec<Vec<(u32, BigInt)>>) -> Self {
        debug_assert_eq!(data.len(), rows);
        let nnz: usize = data.iter().map(|r| r.len()).sum();
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        let mut col_count = vec![0usize; cols];
        row_ptr.push(0);
        for row in data {
            for (c, v) in row {
                debug_assert!(!v.is_zero());
                col_count[c as usize] += 1;
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        let mut col_ptr = Vec::with_capacity(cols + 1);
        col_ptr.push(0);
        for c in 0..cols {
            col_ptr.push(col_ptr[c] + col_count[c]);
        }
        let mut fill = col_ptr.clone();
        let mut row_idx = vec![0u32; nnz];
        for r in 0..rows {
            for &c in &col_idx[row_ptr[r]..row_ptr[r + 1]] {
                row_idx[fill[c as usize]] = r as u32;
                fill[c as usize] += 1;
            }
        }
        SparseIntMatrix { rows, cols, row_ptr, col_idx, values, col_ptr, row_idx }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Non-zero entries of row `r` as `(column, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, &BigInt)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().map(|&c| c as usize).zip(self.values[span].iter())
    }

    /// Row positions of the non-zeros of column `c`, ascending.
    pub fn col_pattern(&self, c: usize) -> &[u32] {
        &self.row_idx[self.col_ptr[c]..self.col_ptr[c + 1]]
    }

    pub fn get(&self, r: usize, c: usize) -> BigInt {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&(c as u32)) {
            Ok(k) => self.values[span.start + k].clone(),
            Err(_) => BigInt::zero(),
        }
    }

    /// Entries as `(row, col, value)` sorted by `(col, row)`.
    pub fn triplets(&self) -> Vec<(usize, usize, BigInt)> {
        let mut out = Vec::with_capacity(self.nnz());
        for c in 0..self.cols {
            for &r in self.col_pattern(c) {
                out.push((r as usize, c, self.get(r as usize, c)));
            }
        }
        out
    }

    pub fn max_bits(&self) -> u64 {
        self.values.iter().map(|v| v.bits()).max().unwrap_or(0)
    }

    pub fn transpose(&self) -> SparseIntMatrix {
        let mut data: Vec<Vec<(u32, BigInt)>> = vec![Vec::new(); self.cols];
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                data[c].push((r as u32, v.clone()));
            }
        }
        Self::from_sorted_rows(self.cols, self.rows, data)
    }

    pub fn mul(&self, other: &SparseIntMatrix) -> Result<SparseIntMatrix, LinError> {
        if self.cols != other.rows {
            return Err(LinError::Shape(format!("{}x{} times {}x{}", self.rows, self.cols, other.rows, other.cols)));
        }
        let mut data = Vec::with_capacity(self.rows);
        let mut acc: Vec<BigInt> = vec![BigInt::zero(); other.cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; other.cols];
        for r in 0..self.rows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !mark[c] {
                        mark[c] = true;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            let mut row = Vec::new();
            for &c in &touched {
                mark[c] = false;
                let v = std::mem::take(&mut acc[c]);
                if !v.is_zero() {
                    row.push((c as u32, v));
                }
            }
            touched.clear();
            data.push(row);
        }
        Ok(Self::from_sorted_rows(self.rows, other.cols, data))
    }

    pub fn mul_vec(&self, x: &[BigInt]) -> Result<Vec<BigInt>, LinError> {
        if x.len() != self.cols {
            return Err(LinError::Shape(format!("{}x{} times vector of {}", self.rows, self.cols, x.len())));
        }
        Ok((0..self.rows).map(|r| self.row(r).map(|(c, v)| v * &x[c]).sum()).collect())
    }

    /// Applies `f(row, col, value)` to every entry, dropping results that are zero.
    pub fn map_entries<F>(&self, f: F) -> SparseIntMatrix
    where
        F: Fn(usize, usize, &BigInt) -> BigInt,
    {
        let data = (0..self.rows)
            .map(|r| self.row(r).map(|(c, v)| (c as u32, f(r, c, v))).filter(|e| !e.1.is_zero()).collect())
            .collect();
        Self::from_sorted_rows(self.rows, self.cols, data)
    }

    pub fn neg(&self) -> SparseIntMatrix {
        self.map_entries(|_, _, v| -v)
    }

    pub fn to_dense(&self) -> Vec<Vec<BigInt>> {
        let mut out = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v.clone();
            }
        }
        out
    }

    /// Column `c` as sparse `(row, value)` pairs.
    pub fn column(&self, c: usize) -> Vec<(usize, BigInt)> {
        self.col_pattern(c).iter().map(|&r| (r as usize, self.get(r as usize, c))).collect()
    }

    /// Builds a matrix from sparse columns.
    pub fn from_columns(rows: usize, columns: &[Vec<(usize, BigInt)>]) -> Result<SparseIntMatrix, LinError> {
        let trip = columns.iter().enumerate().flat_map(|(c, col)| col.iter().map(move |(r, v)| (*r, c, v.clone())));
        Self::from_triplets(rows, columns.len(), trip)
    }

    /// Stacks `blocks` (row offset, column offset, matrix) into a `rows x cols` matrix.
    pub fn assemble_blocks(
        rows: usize,
        cols: usize,
        blocks: &[(usize, usize, &SparseIntMatrix)],
    ) -> Result<SparseIntMatrix, LinError> {
        let trip = blocks.iter().flat_map(|(r0, c0, m)| {
            (0..m.rows()).flat_map(move |r| m.row(r).map(move |(c, v)| (r0 + r, c0 + c, v.clone())))
        });
        Self::from_triplets(rows, cols, trip)
    }

    /// Matrix triplet text format: header, `rows=R cols=C`, then `i j v` lines sorted by `(j, i)`.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# parslit-matrix v1")?;
        writeln!(w, "rows={} cols={}", self.rows, self.cols)?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{i} {j} {v}")?;
        }
        Ok(())
    }

    pub fn read_triplets<R: BufRead>(r: R) -> Result<SparseIntMatrix, LinError> {
        let mut lines = r.lines();
        let bad = |s: &str| LinError::Format(s.to_string());
        let header = lines.next().ok_or_else(|| bad("empty input"))?.map_err(|e| bad(&e.to_string()))?;
        if header.trim() != "# parslit-matrix v1" {
            return Err(bad(&format!("unexpected header {header:?}")));
        }
        let dims = lines.next().ok_or_else(|| bad("missing dimensions"))?.map_err(|e| bad(&e.to_string()))?;
        let mut rows = None;
        let mut cols = None;
        for tok in dims.split_whitespace() {
            if let Some(v) = tok.strip_prefix("rows=") {
                rows = v.parse::<usize>().ok();
            } else if let Some(v) = tok.strip_prefix("cols=") {
                cols = v.parse::<usize>().ok();
            }
        }
        let (rows, cols) = rows.zip(cols).ok_or_else(|| bad(&format!("bad dimensions line {dims:?}")))?;
        let mut trip = Vec::new();
        for line in lines {
            let line = line.map_err(|e| bad(&e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(bad(&line));
            }
            let i = toks[0].parse::<usize>().map_err(|_| bad(&line))?;
            let j = toks[1].parse::<usize>().map_err(|_| bad(&line))?;
            let v = toks[2].parse::<BigInt>().map_err(|_| bad(&line))?;
            trip.push((i, j, v));
        }
        Self::from_triplets(rows, cols, trip)
    }
}

impl std::fmt::Debug for SparseIntMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SparseIntMatrix({}x{}, nnz={})", self.rows, self.cols, self.nnz())?;
        if self.rows * self.cols <= 64 {
            for row in self.to_dense() {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                write!(f, "\n  [{}]", cells.join(" "))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_merge_and_drop_zeros() {
        let m =
            SparseIntMatrix::from_triplets(2, 3, vec![(0, 1, 2), (0, 1, -2), (1, 2, 5), (1, 0, 1), (1, 0, 1)]).unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 0), BigInt::from(2));
        assert_eq!(m.col_pattern(1), &[] as &[u32]);
        assert_eq!(m.col_pattern(2), &[1]);
        assert!(SparseIntMatrix::from_triplets(1, 1, vec![(1, 0, 1)]).is_err());
    }

    #[test]
    fn product_and_transpose() {
        let a = SparseIntMatrix::from_dense(&[vec![1, 2], vec![0, 3]]);
        let b = SparseIntMatrix::from_dense(&[vec![4, 0], vec![1, -1]]);
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab, SparseIntMatrix::from_dense(&[vec![6, -2], vec![3, -3]]));
        assert_eq!(a.transpose().transpose(), a);
        assert_eq!(a.transpose().get(1, 0), BigInt::from(2));
        assert!(a.mul(&SparseIntMatrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn text_format() {
        let a = SparseIntMatrix::from_dense(&[vec![0, -7], vec![3, 0], vec![0, 1]]);
        let mut buf = Vec::new();
        a.write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "# parslit-matrix v1\nrows=3 cols=2\n1 0 3\n0 1 -7\n2 1 1\n");
        assert_eq!(SparseIntMatrix::read_triplets(&buf[..]).unwrap(), a);
        assert!(SparseIntMatrix::read_triplets("junk\n".as_bytes()).is_err());
    }

    #[test]
    fn empty_shapes() {
        let z = SparseIntMatrix::zeros(0, 4);
        assert_eq!((z.rows(), z.cols()), (0, 4));
        assert!(z.is_zero());
        assert_eq!(z.transpose().rows(), 4);
    }
}
