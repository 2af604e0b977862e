//! Recomputes the published homology tables and cell counts.

use std::time::Instant;

use anyhow::{bail, Result};
use slit_core::complex::generate_basis;
use slit_core::exactlin::{HomologyGroup, SnfConfig};
use slit_core::homology::{compute_e1, matrices_for, moduli_homology, HomologyJob};

struct Row {
    g: usize,
    m: usize,
    permutable: bool,
    /// `(free rank, torsion)` per degree, starting at 0.
    groups: &'static [(usize, &'static [u64])],
}

const ROWS: &[Row] = &[
    Row { g: 1, m: 0, permutable: true, groups: &[(1, &[]), (1, &[])] },
    Row { g: 1, m: 1, permutable: true, groups: &[(1, &[]), (1, &[]), (0, &[2])] },
    Row { g: 1, m: 2, permutable: true, groups: &[(1, &[]), (1, &[2]), (0, &[2, 2]), (0, &[2])] },
    Row { g: 2, m: 0, permutable: true, groups: &[(1, &[]), (0, &[10]), (0, &[2]), (1, &[2]), (0, &[6])] },
    Row { g: 1, m: 2, permutable: false, groups: &[(1, &[]), (1, &[]), (0, &[2, 2, 2]), (1, &[]), (1, &[])] },
    Row {
        g: 1,
        m: 3,
        permutable: true,
        groups: &[(1, &[]), (1, &[2]), (0, &[2, 2]), (1, &[2, 2]), (1, &[]), (1, &[])],
    },
    Row {
        g: 2,
        m: 1,
        permutable: true,
        groups: &[(1, &[]), (0, &[10]), (1, &[2]), (2, &[2, 2]), (0, &[6, 6]), (1, &[]), (1, &[])],
    },
];

/// `(m, cells at q = 5, cells at q = 4, E¹ ranks at q = 5)` for `h = 5`, indexed by `p`.
type CountRow = (usize, [usize; 11], [usize; 11], [usize; 11]);

const H5_COUNTS: &[CountRow] = &[
    (
        1,
        [0, 0, 1, 240, 6170, 51115, 195264, 394240, 435680, 249480, 57960],
        [0, 0, 0, 216, 7840, 76140, 320880, 694148, 808192, 482328, 115920],
        [0, 0, 1, 60, 650, 2860, 6588, 8708, 6678, 2772, 483],
    ),
    (
        3,
        [0, 0, 0, 0, 640, 12425, 74610, 202825, 278600, 189000, 50400],
        [0, 0, 0, 0, 800, 18500, 122700, 357280, 516880, 365400, 100800],
        [0, 0, 0, 0, 70, 700, 2520, 4480, 4270, 2100, 420],
    ),
    (
        5,
        [0, 0, 0, 0, 0, 0, 1296, 7735, 16520, 15120, 5040],
        [0, 0, 0, 0, 0, 0, 2160, 13692, 30688, 29232, 10080],
        [0, 0, 0, 0, 0, 0, 1, 14, 56, 84, 42],
    ),
];

fn show(groups: &[HomologyGroup]) -> String {
    let parts: Vec<String> = groups.iter().map(|g| g.to_string()).collect();
    parts.join(", ")
}

pub fn run(max_h: usize, snf: &SnfConfig) -> Result<()> {
    let mut failures = 0;
    for row in ROWS.iter().filter(|r| 2 * r.g + r.m <= max_h) {
        let t = Instant::now();
        let want: Vec<HomologyGroup> =
            row.groups.iter().map(|(f, t)| HomologyGroup::new(*f, t.iter().copied())).collect();
        let job = HomologyJob { permutable: row.permutable, snf: snf.clone(), ..HomologyJob::new(row.g, row.m) };
        let name = format!("Mod_{{{},1}}^{}{}", row.g, row.m, if row.permutable { "" } else { " numbered" });
        let (got, ok) = match moduli_homology(&job) {
            Ok(r) => (show(r.trimmed()), r.trimmed() == want.as_slice()),
            Err(e) => (format!("error: {e}"), false),
        };
        failures += usize::from(!ok);
        println!(
            "{name:<24} expected ({})  computed ({got})  {}  [{:.1?}]",
            show(&want),
            if ok { "PASS" } else { "FAIL" },
            t.elapsed()
        );
    }
    if max_h >= 5 {
        for &(m, q5, q4, e1_row) in H5_COUNTS {
            let t = Instant::now();
            let basis = generate_basis(5, m)?;
            let n5: Vec<usize> = (0..=10).map(|p| basis.size(p, 5)).collect();
            let n4: Vec<usize> = (0..=10).map(|p| basis.size(p, 4)).collect();
            let counts_ok = n5 == q5 && n4 == q4;
            failures += usize::from(!counts_ok);
            println!("N_(p,q)(5,{m}) q=5 {n5:?} q=4 {n4:?}  {}", if counts_ok { "PASS" } else { "FAIL" });
            let job = HomologyJob { snf: snf.clone(), ..HomologyJob::new((5 - m) / 2, m) };
            let mats = matrices_for(&job, &basis)?;
            drop(basis);
            let e1 = compute_e1(&mats, snf)?;
            let ranks: Vec<usize> = (0..=10).map(|p| e1.rank(p)).collect();
            let e1_ok = ranks == e1_row;
            failures += usize::from(!e1_ok);
            println!("E1 ranks (5,{m}) q=5 {ranks:?}  {}  [{:.1?}]", if e1_ok { "PASS" } else { "FAIL" }, t.elapsed());
        }
    }
    if failures > 0 {
        bail!("{failures} table entries do not match");
    }
    Ok(())
}
