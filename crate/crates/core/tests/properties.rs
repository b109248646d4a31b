mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn parseval_and_round_trip(c in case_strategy()) {
        check_parseval(&c).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn leray_is_idempotent(c in case_strategy()) {
        check_leray(&c).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn sigma_is_bounded_by_tau(c in case_strategy()) {
        check_sigma_bound(&c).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn cutoff_partitions_unity(c in case_strategy()) {
        check_cutoff(&c).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn functionals_are_sandwiched(c in case_strategy()) {
        check_sandwich(&c).map_err(TestCaseError::fail)?;
    }
}
