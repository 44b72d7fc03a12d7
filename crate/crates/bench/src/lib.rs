//! Shared inputs for the benchmark targets: the largest shipped reference
//! set (p = 97, d = 76) and its construction parameters.

use smallbias_core::derandomizer::ParameterSet;
use smallbias_core::group::CyclicGroup;
use smallbias_core::set_file::parse_set;

pub const GAMMA: f64 = 0.4472135954999579;

pub fn group_97() -> CyclicGroup {
    CyclicGroup::new(97).unwrap()
}

pub fn reference_set_97() -> ParameterSet {
    parse_set(include_str!("../../../fixtures/p97_d76.txt")).unwrap()
}
