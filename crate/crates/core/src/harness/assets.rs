//! Fracture geometries shipped with the crate.

pub const TEST1: &str = include_str!("../../assets/fractures_test1.csv");
pub const TEST2: &str = include_str!("../../assets/fractures_test2.csv");

pub const BUNDLED_NAMES: [&str; 2] = ["test1", "test2"];

/// Text of a bundled fracture file by name.
pub fn bundled_fractures(name: &str) -> Option<&'static str> {
    match name {
        "test1" => Some(TEST1),
        "test2" => Some(TEST2),
        _ => None,
    }
}
