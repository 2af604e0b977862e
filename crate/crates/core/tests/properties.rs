mod common;

use std::collections::HashMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use slit_core::cells::{BarCell, HomCell};
use slit_core::complex::{generate_basis, PermutableBasis};
use slit_core::exactlin::{lll_reduce, rank_mod2, rank_rational, snf, Delta, SparseIntMatrix};
use slit_core::homology::{moduli_homology, HomologyJob};
use slit_core::perm::Permutation;

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

fn perm(max_degree: usize) -> impl Strategy<Value = Permutation> {
    (1..=max_degree).prop_flat_map(|n| (0..factorial(n)).prop_map(move |r| Permutation::from_rank(n, r).unwrap()))
}

fn perm_pair(max_degree: usize) -> impl Strategy<Value = (Permutation, Permutation)> {
    (1..=max_degree).prop_flat_map(|n| {
        let one = move || (0..factorial(n)).prop_map(move |r| Permutation::from_rank(n, r).unwrap());
        (one(), one())
    })
}

fn cayley(n: usize) -> &'static HashMap<Vec<usize>, usize> {
    static TABLES: OnceLock<Vec<HashMap<Vec<usize>, usize>>> = OnceLock::new();
    &TABLES.get_or_init(|| (0..=6).map(common::cayley_distances).collect())[n]
}

proptest! {
    #[test]
    fn word_length_is_cayley_distance(a in perm(6)) {
        let images: Vec<usize> = a.images().iter().map(|&x| x as usize).collect();
        prop_assert_eq!(a.word_length(), a.degree() - a.ncyc());
        prop_assert_eq!(a.word_length(), cayley(a.degree())[&images]);
    }

    #[test]
    fn delete_undoes_insert(a in perm(10), j in 0usize..11) {
        let j = j % (a.degree() + 1);
        prop_assert_eq!(a.insert(j).unwrap().delete(j).unwrap(), a);
    }

    #[test]
    fn word_length_is_subadditive((a, b) in perm_pair(9)) {
        prop_assert!((a * b).word_length() <= a.word_length() + b.word_length());
    }

    #[test]
    fn cycle_count_is_conjugation_invariant((a, g) in perm_pair(9)) {
        prop_assert_eq!(a.conjugate_by(&g).ncyc(), a.ncyc());
        prop_assert_eq!(g * a * g.inverse(), a.conjugate_by(&g));
    }

    #[test]
    fn rank_round_trips(a in perm(12)) {
        prop_assert_eq!(Permutation::from_rank(a.degree(), a.rank()).unwrap(), a);
    }
}

/// Random `(σ_q, …, σ_1, ω)`.
fn hom_cell() -> impl Strategy<Value = HomCell> {
    (1usize..=7, 0usize..=4).prop_flat_map(|(n, q)| {
        prop::collection::vec((0..factorial(n)).prop_map(move |r| Permutation::from_rank(n, r).unwrap()), q).prop_map(
            move |mut sigmas| {
                sigmas.push(Permutation::rotation(n - 1));
                HomCell::new(&sigmas).unwrap()
            },
        )
    })
}

proptest! {
    #[test]
    fn bar_form_round_trips(c in hom_cell()) {
        let bar = c.to_bar();
        prop_assert_eq!(bar.to_hom(), c.clone());
        let again = BarCell::new(bar.p(), bar.taus().to_vec()).unwrap();
        prop_assert_eq!(again.to_hom().to_bar().taus().to_vec(), bar.taus().to_vec());
        prop_assert_eq!(bar.norm(), c.norm());
    }

    #[test]
    fn cell_text_round_trips(c in hom_cell()) {
        prop_assert_eq!(c.to_text().parse::<HomCell>().unwrap(), c);
    }
}

fn bases() -> &'static [(usize, usize, PermutableBasis)] {
    static BASES: OnceLock<Vec<(usize, usize, PermutableBasis)>> = OnceLock::new();
    BASES.get_or_init(|| {
        let mut out = Vec::new();
        for h in 1..=3 {
            for m in (h % 2..=h).step_by(2) {
                out.push((h, m, generate_basis(h, m).unwrap()));
            }
        }
        out
    })
}

fn basis_cell() -> impl Strategy<Value = (usize, usize, HomCell)> {
    (0..bases().len(), any::<prop::sample::Index>()).prop_map(|(b, pick)| {
        let (h, m, basis) = &bases()[b];
        let all: Vec<&HomCell> = (0..=2 * h).flat_map(|p| (0..=*h).flat_map(move |q| basis.cells(p, q))).collect();
        (*h, *m, all[pick.index(all.len())].clone())
    })
}

proptest! {
    #[test]
    fn nondegenerate_cells_in_bar_form((h, m, c) in basis_cell()) {
        prop_assert!(c.is_nondegenerate(h, m));
        let bar = c.to_bar();
        let taus = bar.taus();
        for t in taus {
            prop_assert_eq!(t.apply(0), 0);
            prop_assert!(!t.is_identity());
        }
        for k in 1..=bar.p() {
            prop_assert!(taus.iter().any(|t| t.apply(k) != k), "common fixed point {} in {:?}", k, bar);
        }
        let (genus, punctures) = c.surface_invariants().unwrap();
        prop_assert_eq!(2 * genus + punctures, c.norm());
        prop_assert_eq!((genus, punctures), ((h - m) / 2, m));
        prop_assert_eq!((c.sigma(c.q()).ncyc() - 1) % 2, c.norm() % 2);
    }
}

fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..=8, 1usize..=8).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-9i64..=9, c), r))
}

fn sparse(dense: &[Vec<i64>]) -> SparseIntMatrix {
    SparseIntMatrix::from_dense(dense)
}

fn big(rows: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn snf_matches_minor_gcds(a in small_matrix()) {
        prop_assume!(a.len() * a[0].len() <= 42);
        let res = snf(&sparse(&a), false);
        prop_assert_eq!(&res.divisors, &common::divisors_by_minors(&a));
        prop_assert!(res.divisors.windows(2).all(|w| (&w[1] % &w[0]).is_zero()));
    }

    #[test]
    fn snf_ignores_row_and_column_order(
        a in small_matrix(),
        row_seed in any::<u64>(),
        col_seed in any::<u64>(),
    ) {
        let rows = a.len();
        let cols = a[0].len();
        let rp = Permutation::from_rank(rows, row_seed % factorial(rows)).unwrap();
        let cp = Permutation::from_rank(cols, col_seed % factorial(cols)).unwrap();
        let shuffled: Vec<Vec<i64>> =
            (0..rows).map(|r| (0..cols).map(|c| a[rp.apply(r)][cp.apply(c)]).collect()).collect();
        prop_assert_eq!(snf(&sparse(&a), false).divisors, snf(&sparse(&shuffled), false).divisors);
    }

    #[test]
    fn transforms_diagonalize(a in small_matrix()) {
        let m = sparse(&a);
        let res = snf(&m, true);
        let (u, v) = res.transforms.clone().unwrap();
        let d = u.mul(&m).unwrap().mul(&v).unwrap();
        for (r, row) in d.to_dense().iter().enumerate() {
            for (c, x) in row.iter().enumerate() {
                let want = if r == c && r < res.rank { res.divisors[r].clone() } else { BigInt::zero() };
                prop_assert_eq!(x, &want);
            }
        }
        for t in [&u, &v] {
            prop_assert!(common::bareiss(t.to_dense()).abs().is_one());
        }
    }

    #[test]
    fn ranks_agree_with_divisors(a in small_matrix()) {
        let m = sparse(&a);
        let divisors = snf(&m, false).divisors;
        prop_assert_eq!(rank_rational(&m), divisors.len());
        let odd = divisors.iter().filter(|d| (*d % 2u32).is_one()).count();
        prop_assert_eq!(rank_mod2(&m), odd);
    }
}

#[allow(clippy::needless_range_loop)]
fn gram_schmidt(basis: &[Vec<BigInt>]) -> (Vec<Vec<BigRational>>, Vec<Vec<BigRational>>) {
    let dot = |a: &[BigRational], b: &[BigRational]| a.iter().zip(b).map(|(x, y)| x * y).sum::<BigRational>();
    let rows: Vec<Vec<BigRational>> =
        basis.iter().map(|v| v.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect();
    let mut star: Vec<Vec<BigRational>> = Vec::new();
    let mut mu = vec![vec![BigRational::zero(); rows.len()]; rows.len()];
    for (i, b) in rows.iter().enumerate() {
        let mut v = b.clone();
        for j in 0..i {
            mu[i][j] = dot(b, &star[j]) / dot(&star[j], &star[j]);
            for (x, y) in v.iter_mut().zip(&star[j]) {
                *x -= &mu[i][j] * y;
            }
        }
        star.push(v);
    }
    (star, mu)
}

fn independent_basis() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..=4, 0usize..=2)
        .prop_flat_map(|(n, extra)| prop::collection::vec(prop::collection::vec(-40i64..=40, n + extra), n))
        .prop_filter("independent", |b| rank_rational(&sparse(b)) == b.len())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn lll_output_is_reduced_and_spans_the_lattice(b in independent_basis()) {
        let input = big(&b);
        let reduced = lll_reduce(&input, Delta::THREE_QUARTERS).unwrap();
        prop_assert_eq!(reduced.len(), input.len());

        let (star, mu) = gram_schmidt(&reduced);
        let norm2 = |v: &[BigRational]| v.iter().map(|x| x * x).sum::<BigRational>();
        let half = BigRational::new(1.into(), 2.into());
        let delta = BigRational::new(3.into(), 4.into());
        for i in 0..reduced.len() {
            for (j, coeff) in mu[i][..i].iter().enumerate() {
                prop_assert!(coeff.abs() <= half, "size reduction fails at ({}, {})", i, j);
            }
            if i > 0 {
                let lhs = norm2(&star[i]);
                let rhs = (&delta - &mu[i][i - 1] * &mu[i][i - 1]) * norm2(&star[i - 1]);
                prop_assert!(lhs >= rhs, "Lovász condition fails at {}", i);
            }
        }

        let small: Vec<Vec<i64>> =
            reduced.iter().map(|v| v.iter().map(|x| i64::try_from(x).unwrap()).collect()).collect();
        let both: Vec<Vec<i64>> = b.iter().chain(&small).cloned().collect();
        let before = common::divisors_by_minors(&b);
        prop_assert_eq!(&common::divisors_by_minors(&small), &before);
        prop_assert_eq!(&common::divisors_by_minors(&both), &before);
    }
}

#[test]
fn lll_rejects_dependent_vectors() {
    let v = big(&[vec![1, 2, 3], vec![2, 4, 6]]);
    assert!(lll_reduce(&v, Delta::THREE_QUARTERS).is_err());
}

/// Widest intermediate entry seen while reducing the spectral-sequence matrices.
#[test]
fn peak_bits_stay_bounded_at_h4() {
    const BOUND: u64 = 16;
    for (g, m) in [(2, 0), (1, 2), (0, 4)] {
        let r = moduli_homology(&HomologyJob::new(g, m)).unwrap();
        assert!(r.peak_bits <= BOUND, "({g},{m}) peaked at {} bits", r.peak_bits);
    }
}
