use std::sync::OnceLock;

use discrepancy_core::erdos_turan::{default_r_grid, et_bound, grid_search_r, optimal_r, RRule};
use discrepancy_core::kernel::{KernelConfig, KernelTable};
use discrepancy_core::majorant::{majorant_pair, sandwich_report};
use discrepancy_core::pointsets::lattice;
use discrepancy_core::torus::{SetSpec, TorusSet};

fn kernel() -> &'static KernelTable {
    static K: OnceLock<KernelTable> = OnceLock::new();
    K.get_or_init(|| KernelTable::build(&KernelConfig::new(2)).unwrap())
}

fn ball() -> TorusSet {
    TorusSet::from_spec(&SetSpec::Ball {
        center: vec![0.5, 0.5],
        radius: 0.25,
    })
    .unwrap()
}

#[test]
fn small_sandwich_holds() {
    let set = TorusSet::from_spec(&SetSpec::Box {
        lower: vec![0.2, 0.3],
        upper: vec![0.7, 0.6],
    })
    .unwrap();
    let pair = majorant_pair(&set, kernel(), 8.0).unwrap();
    assert!(pair.a.hermitian_defect() < 1e-12 && pair.b.hermitian_defect() < 1e-12);
    let (report, rows) = sandwich_report(&pair, &set, kernel(), 64).unwrap();
    assert!(report.holds(), "{report:?}");
    assert!(report.mean_a <= report.measure && report.measure <= report.mean_b);
    assert_eq!(rows.len(), 64 * 64);
    assert!(sandwich_report(&pair, &set, kernel(), 16).is_err());
}

#[test]
fn lattice_bound_is_valid() {
    let pts = lattice(2, 4096).unwrap();
    let report = et_bound(&ball(), &pts, kernel(), 64.0).unwrap();
    assert!(report.true_discrepancy.is_some());
    assert!(report.is_valid());
}

#[test]
fn lattice_below_resonance_has_no_weyl_term() {
    let pts = lattice(2, 4096).unwrap();
    let report = et_bound(&ball(), &pts, kernel(), 32.0).unwrap();
    assert_eq!(report.breakdown.contributing, 0);
    assert_eq!(report.breakdown.weyl_term, 0.0);
    assert_eq!(report.bound, report.breakdown.h0_term);
}

#[test]
fn grid_search_never_exceeds_formula() {
    let pts = lattice(2, 1024).unwrap();
    let formula = optimal_r(RRule::Lattice, 1024, 2, 1.0, 1.0).unwrap();
    let (best, reports) = grid_search_r(&ball(), &pts, kernel(), &default_r_grid(), Some(formula)).unwrap();
    let last = reports.last().unwrap();
    assert_eq!(last.r, formula);
    assert!(reports[best].bound <= last.bound);
    assert!(reports.iter().all(|r| r.is_valid()));
}

#[test]
fn small_r_is_rejected() {
    let pts = lattice(2, 1024).unwrap();
    assert!(et_bound(&ball(), &pts, kernel(), 2.0).is_err());
    assert!(majorant_pair(&ball(), kernel(), 3.0).is_err());
}
