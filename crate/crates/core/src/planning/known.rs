//! Reference complexities for the fixture maps.

use super::plan::ReferenceBound;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KnownValue {
    pub name: &'static str,
    /// `TC`, `cat` or `csec`.
    pub quantity: &'static str,
    pub lo: u32,
    pub hi: u32,
    pub citation: &'static str,
}

const PUBLISHED: &str = "published value";
const EXTERNAL: &str = "external reference: standard literature constant";

pub const KNOWN_VALUES: &[KnownValue] = &[
    KnownValue { name: "planar_rr", quantity: "TC", lo: 3, hi: 3, citation: PUBLISHED },
    KnownValue { name: "scara", quantity: "TC", lo: 3, hi: 3, citation: PUBLISHED },
    KnownValue { name: "pointing", quantity: "TC", lo: 3, hi: 4, citation: "published bounds: either 3 or 4" },
    KnownValue { name: "h_fixture", quantity: "csec", lo: 2, hi: 2, citation: PUBLISHED },
    KnownValue { name: "identity_interval", quantity: "TC", lo: 1, hi: 1, citation: EXTERNAL },
    KnownValue { name: "identity_circle", quantity: "TC", lo: 2, hi: 2, citation: EXTERNAL },
    KnownValue { name: "identity_torus", quantity: "TC", lo: 3, hi: 3, citation: EXTERNAL },
    KnownValue { name: "torus", quantity: "cat", lo: 3, hi: 3, citation: EXTERNAL },
];

/// The `TC` entry for a map name, as attached to built-in plans.
pub fn reference_for(map: &str) -> Option<ReferenceBound> {
    KNOWN_VALUES
        .iter()
        .find(|k| k.name == map && k.quantity == "TC")
        .map(|k| ReferenceBound { lo: k.lo, hi: k.hi, citation: k.citation.to_string() })
}
