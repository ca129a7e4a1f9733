//! Built-in knot diagrams.

use crate::diagram::{parse_pd, Diagram};
use crate::error::{Error, Result};

pub struct Entry {
    pub name: &'static str,
    pub aliases: &'static [&'static str],
    pub pd: &'static str,
    /// Jones polynomial of the diagram in the convention of `kauffman_jones`.
    pub jones: &'static [(i64, i64)],
}

pub const ENTRIES: &[Entry] = &[
    Entry {
        name: "3_1",
        aliases: &["trefoil"],
        pd: include_str!("../data/3_1.pd"),
        jones: &[(1, 1), (3, 1), (4, -1)],
    },
    Entry {
        name: "4_1",
        aliases: &["figure8", "figure-8"],
        pd: include_str!("../data/4_1.pd"),
        jones: &[(-2, 1), (-1, -1), (0, 1), (1, -1), (2, 1)],
    },
    Entry {
        name: "5_2",
        aliases: &[],
        pd: include_str!("../data/5_2.pd"),
        jones: &[(1, 1), (2, -1), (3, 2), (4, -1), (5, 1), (6, -1)],
    },
    Entry {
        name: "6_1",
        aliases: &[],
        pd: include_str!("../data/6_1.pd"),
        jones: &[(-2, 1), (-1, -1), (0, 2), (1, -2), (2, 1), (3, -1), (4, 1)],
    },
    Entry {
        name: "6_2",
        aliases: &[],
        pd: include_str!("../data/6_2.pd"),
        jones: &[(-1, 1), (0, -1), (1, 2), (2, -2), (3, 2), (4, -2), (5, 1)],
    },
    Entry {
        name: "7_4",
        aliases: &[],
        pd: include_str!("../data/7_4.pd"),
        jones: &[(-8, -1), (-7, 1), (-6, -2), (-5, 3), (-4, -2), (-3, 3), (-2, -2), (-1, 1)],
    },
    Entry {
        name: "8_19",
        aliases: &[],
        pd: include_str!("../data/8_19.pd"),
        jones: &[(-8, -1), (-5, 1), (-3, 1)],
    },
    Entry {
        name: "8_20",
        aliases: &[],
        pd: include_str!("../data/8_20.pd"),
        jones: &[(-8, 1), (-7, -2), (-6, 3), (-5, -4), (-4, 3), (-3, -3), (-2, 3), (-1, -1), (0, 1)],
    },
];

pub fn names() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.name).collect()
}

pub fn entry(name: &str) -> Option<&'static Entry> {
    let key = name.to_ascii_lowercase();
    ENTRIES
        .iter()
        .find(|e| e.name == key || e.aliases.iter().any(|a| *a == key))
}

pub fn diagram(name: &str) -> Result<Diagram> {
    if matches!(name.to_ascii_lowercase().as_str(), "unknot" | "0_1") {
        return Ok(Diagram::unknot());
    }
    let e = entry(name).ok_or_else(|| Error::BadInput(format!("unknown knot {}", name)))?;
    parse_pd(e.pd)
}

/// All built-in diagrams (the unknot excluded).
pub fn all() -> Vec<(&'static str, Diagram)> {
    ENTRIES
        .iter()
        .map(|e| (e.name, parse_pd(e.pd).expect("built-in PD code parses")))
        .collect()
}
