//! Instances shared by the benchmarks.

use medianwall::generators::generate;
use medianwall::instance::Instance;

pub const GRAPHS: [&str; 2] = ["path(60)", "random_tree(40,1)"];
pub const PRODUCTS: [&str; 1] = ["staircase(12)"];

pub fn instance(spec: &str) -> Instance {
    Instance::generated(generate(spec).expect("bundled spec"), 1)
}
