//! Fixtures shared by the benchmarks.

use discrepancy_core::kernel::{KernelConfig, KernelTable};
use discrepancy_core::torus::{Polytope, SetSpec, TorusSet};

pub fn kernel_2d() -> KernelTable {
    KernelTable::build(&KernelConfig::new(2)).expect("d = 2 kernel builds")
}

pub fn ball_2d() -> TorusSet {
    TorusSet::from_spec(&SetSpec::Ball {
        center: vec![0.5, 0.5],
        radius: 0.25,
    })
    .expect("valid ball")
}

pub fn pentagon() -> Polytope {
    Polytope::from_vertices(
        vec![
            vec![0.1, 0.1],
            vec![0.7, 0.05],
            vec![0.9, 0.5],
            vec![0.5, 0.9],
            vec![0.15, 0.6],
        ],
        1e-9,
    )
    .expect("valid pentagon")
}

pub fn octahedron() -> Polytope {
    let c = 0.5;
    let r = 0.3;
    let mut v = Vec::new();
    for axis in 0..3 {
        for s in [-r, r] {
            let mut p = vec![c; 3];
            p[axis] += s;
            v.push(p);
        }
    }
    Polytope::from_vertices(v, 1e-9).expect("valid octahedron")
}
