//! Brute-force cross-check of the constrained growth functional: the
//! coordinate-ascent oracle in `common` must bracket the profile value.

mod common;

use glpin_core::iquant::{compute_i_rc, solve_profile, DEFAULT_KNOTS};
use glpin_core::PotentialSpec;

#[test]
fn coordinate_ascent_oracle_brackets_the_profile_value() {
    for pot in [
        PotentialSpec::quartic(),
        PotentialSpec::exp_family(1.0).unwrap(),
    ] {
        let (r_outer, c) = (1000.0, 1.0);
        let profile = solve_profile(&pot, r_outer, c, DEFAULT_KNOTS).unwrap();
        let i_rc = compute_i_rc(&profile).value;
        let oracle = common::ascend(&pot, r_outer, c);
        assert!(
            oracle <= 1.02 * i_rc,
            "oracle {oracle} exceeds profile value {i_rc} by more than 2%"
        );
        assert!(
            oracle >= 0.90 * i_rc,
            "oracle {oracle} far below profile value {i_rc}: ascent is broken"
        );
    }
}
