//! Heavier cross-checks, ignored by default. Run with
//! `cargo test -p tautres-core --release --test deep -- --ignored`.

use tautres_core::chern::parse_phi;
use tautres_core::oracle::{ab_integrate, ToricSurfaceChart};
use tautres_core::selftest::p2_table;
use tautres_core::tautint::*;

/// Five points on `P^2`: exercises `Q_4` in a live integral and pins the
/// size-5 block weight against the localization oracle.
#[test]
#[ignore = "several seconds in release; run explicitly"]
fn k5_oracle_agreement() {
    let d = 2i64;
    for phi_src in ["c1^2*c2^4", "c2^5"] {
        let phi = parse_phi(phi_src).unwrap();
        let spec = ProblemSpec::manifold(2, 5, 1, phi.clone());
        let ui = integrate_ghilb(&spec, Some(&p2_table(d)), &IntegrateOptions::default()).unwrap();
        let oracle = ab_integrate(&ToricSurfaceChart::p2(d), 5, &phi)
            .unwrap()
            .as_rational()
            .unwrap();
        assert_eq!(ui.total.unwrap(), oracle, "phi = {phi_src}");
    }
}
