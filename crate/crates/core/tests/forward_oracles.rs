mod common;

use common::*;
use pals::forward::dot::{dot_solve, DotModel, DotSetup};
use pals::{DataVector, Field, ForwardModel};

#[test]
fn ct_disk_chords_within_two_percent() {
    let e = disk_chord_error(128);
    assert!(e < 0.02, "relative chord error {e}");
    assert!(disk_chord_error(256) < e);
}

#[test]
fn ert_self_convergence_is_second_order() {
    let p = ert_order();
    assert!((p - 2.0).abs() <= 0.3, "order {p}");
}

#[test]
fn dot_self_convergence_is_second_order() {
    for freq in [0.0, 50e6] {
        let p = dot_order(freq);
        assert!((p - 2.0).abs() <= 0.3, "order {p} at {freq} Hz");
    }
}

#[test]
fn ert_reciprocity() {
    assert!(ert_reciprocity_gap() <= 1e-10);
}

#[test]
fn dot_reciprocity_and_symmetry() {
    let (asym, recip) = dot_symmetry_gaps();
    assert_eq!(asym, 0.0);
    assert!(recip <= 1e-10);
}

#[test]
fn jacobian_and_adjoint_identities() {
    for (name, jac, adj) in jacobian_adjoint_errors() {
        assert!(jac < 1e-3, "{name}: jacobian {jac}");
        assert!(adj < 1e-10, "{name}: adjoint {adj}");
    }
}

#[test]
fn dc_block_matches_real_solve() {
    let s = DotSetup::square(0.05, 16, 2, vec![0.0], 600.0).unwrap();
    let a = Field::from_fn(&s.grid, |c| 0.5 + 0.001 * c as f64);
    let DataVector::Complex(d) = DotModel::new(s.clone()).unwrap().forward(&a).unwrap() else { unreachable!() };
    let u = dot_solve(&s, &a, s.cell_of(s.sources[0]).unwrap(), 0.0).unwrap();
    for (k, det) in s.detectors.iter().enumerate() {
        let z = u[s.cell_of(*det).unwrap()];
        assert_eq!(d[k], z);
        assert!(z.im.abs() <= 1e-12 * z.re.abs());
    }
}
