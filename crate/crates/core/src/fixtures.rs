//! The four-vertex, three-objective clique used throughout the docs and tests.

use crate::model::{Instance, OwaWeights};

/// Edge ids: 0=[1,2], 1=[1,3], 2=[1,4], 3=[2,3], 4=[2,4], 5=[3,4].
pub const EXAMPLE1: &str = "\
3 4 6
1 2 3 2 3
1 3 4 3 1
1 4 1 2 2
2 3 2 4 1
2 4 2 6 1
3 4 1 5 1
";

pub fn example1() -> Instance {
    Instance::parse(EXAMPLE1).expect("fixture is valid")
}

/// `w = (0.5, 0.3, 0.2)`
pub fn example1_weights() -> OwaWeights {
    OwaWeights::parse_list("0.5,0.3,0.2").expect("fixture is valid")
}

/// Weight presets used by the benchmark tables.
pub fn preset(name: &str) -> Option<OwaWeights> {
    let list = match name {
        "w3a" => "0.6,0.3,0.1",
        "w3b" => "0.4,0.35,0.25",
        "w5" => "0.5,0.3,0.1,0.06,0.04",
        "w10" => "0.25,0.2,0.15,0.1,0.09,0.08,0.06,0.04,0.02,0.01",
        _ => return None,
    };
    Some(OwaWeights::parse_list(list).expect("preset is valid"))
}

pub const PRESET_NAMES: [&str; 4] = ["w3a", "w3b", "w5", "w10"];
