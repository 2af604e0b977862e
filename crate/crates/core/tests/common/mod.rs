//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use slit_core::cells::HomCell;
use slit_core::perm::Permutation;

fn hom(n: usize, cycles: &[&str]) -> HomCell {
    let sigmas: Vec<Permutation> = cycles.iter().map(|c| Permutation::parse_cycles(n, c).unwrap()).collect();
    HomCell::new(&sigmas).unwrap()
}

/// The eight non-degenerate cells of the torus with one boundary curve.
pub fn sigma(k: usize) -> HomCell {
    match k {
        1 => hom(5, &["(4 1 2 3 0)", "(3 2)(4 1 0)", "(4 3 2 1 0)"]),
        2 => hom(5, &["(4 1 2 3 0)", "(2 1)(4 3 0)", "(4 3 2 1 0)"]),
        3 => hom(5, &["(4 1 2 3 0)", "(4 3 2 1 0)"]),
        4 => hom(4, &["(3 1 2 0)", "(3 1 0)", "(3 2 1 0)"]),
        5 => hom(4, &["(3 1 2 0)", "(3 2 0)", "(3 2 1 0)"]),
        6 => hom(4, &["(3 1 2 0)", "(2 1)(3 0)", "(3 2 1 0)"]),
        7 => hom(4, &["(3 1 2 0)", "(3 2 1 0)"]),
        8 => hom(3, &["(2 1 0)", "(2 0)", "(2 1 0)"]),
        _ => panic!("no cell {k}"),
    }
}

/// Determinant by fraction-free elimination.
pub fn bareiss(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::from(1);
    }
    let mut sign = 1;
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    a[n - 1][n - 1].clone() * sign
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Invariant factors from gcds of minors: `d_k / d_{k-1}` where `d_k` is the gcd
/// of all `k × k` minors.
pub fn divisors_by_minors(a: &[Vec<i64>]) -> Vec<BigInt> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut prev = BigInt::from(1);
    let mut out = Vec::new();
    for k in 1..=rows.min(cols) {
        let mut g = BigInt::zero();
        for rs in subsets(rows, k) {
            for cs in subsets(cols, k) {
                let minor = rs.iter().map(|&r| cs.iter().map(|&c| BigInt::from(a[r][c])).collect()).collect();
                g = g.gcd(&bareiss(minor));
            }
        }
        if g.is_zero() {
            break;
        }
        out.push((&g / &prev).abs());
        prev = g;
    }
    out
}

/// Word lengths of all permutations of `{0, …, n-1}` by breadth-first search in
/// the Cayley graph of all transpositions.
pub fn cayley_distances(n: usize) -> HashMap<Vec<usize>, usize> {
    let start: Vec<usize> = (0..n).collect();
    let mut dist = HashMap::from([(start.clone(), 0)]);
    let mut queue = VecDeque::from([start]);
    while let Some(p) = queue.pop_front() {
        let d = dist[&p];
        for a in 0..n {
            for b in a + 1..n {
                let mut next = p.clone();
                next.swap(a, b);
                if !dist.contains_key(&next) {
                    dist.insert(next.clone(), d + 1);
                    queue.push_back(next);
                }
            }
        }
    }
    dist
}
