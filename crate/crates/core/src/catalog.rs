//! Example maps with hand-derived labels.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::harmonic::{HarmonicMap, MapRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Labeled {
    pub value: Label,
    pub provenance: String,
}

fn yes(why: &str) -> Labeled {
    Labeled {
        value: Label::Yes,
        provenance: why.to_string(),
    }
}

fn no(why: &str) -> Labeled {
    Labeled {
        value: Label::No,
        provenance: why.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    pub normal: Labeled,
    pub sense_preserving: Labeled,
    /// Keyed by φ spec string.
    pub phi_normal: BTreeMap<String, Labeled>,
    /// Point where the Lewy condition fails, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sense_witness: Option<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub map: HarmonicMap,
    pub labels: Labels,
}

impl CatalogEntry {
    pub fn record(&self) -> MapRecord {
        self.map.to_record()
    }
}

const POW2: &str = "pow:2";
const POW15: &str = "pow:1.5";

fn entry(
    name: &str,
    h: &str,
    g: Option<&str>,
    normal: Labeled,
    sense_preserving: Labeled,
    phi: [(&str, Labeled); 2],
    sense_witness: Option<Complex64>,
) -> CatalogEntry {
    let map = HarmonicMap::parse(h, g, name).expect("catalog expressions parse");
    CatalogEntry {
        name: name.to_string(),
        map,
        labels: Labels {
            normal,
            sense_preserving,
            phi_normal: phi.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            sense_witness,
        },
    }
}

pub fn builtin_catalog() -> Vec<CatalogEntry> {
    let bounded_phi = |why: &str| [(POW2, yes(why)), (POW15, yes(why))];
    vec![
        entry(
            "identity",
            "z",
            None,
            yes("(1-r^2)/(1+r^2) is maximal at r = 0 with value 1"),
            yes("h' = 1, g' = 0, so J = 1"),
            bounded_phi("f# <= 1 and phi >= 1 on [0,1)"),
            None,
        ),
        entry(
            "constant",
            "0.5",
            None,
            yes("f# vanishes identically"),
            no("h' vanishes identically"),
            bounded_phi("f# vanishes identically"),
            Some(Complex64::new(0.0, 0.0)),
        ),
        entry(
            "mobius-half",
            "(z + 0.5)/(1 + 0.5*z)",
            None,
            yes("a disk automorphism: (1-|z|^2)|h'| = 1-|h|^2, so the functional is (1-|h|^2)/(1+|h|^2) <= 1"),
            yes("h' = 0.75/(1+0.5z)^2 never vanishes"),
            bounded_phi("|h'| <= 0.75/0.25 = 3 and phi >= 1"),
            None,
        ),
        entry(
            "shear-half",
            "z",
            Some("z^2/2"),
            yes("|h'| + |g'| <= 2, so the functional is at most 2"),
            yes("dilatation z has modulus below 1 and h' = 1"),
            bounded_phi("f# <= 2 and phi >= 1"),
            None,
        ),
        entry(
            "exp-i-cusp",
            "exp(i/(1-z))",
            None,
            no("on z = 1-d, |h| = 1 and |h'| = 1/d^2, giving (2-d)/(2d) -> infinity"),
            yes("h' = i h/(1-z)^2 never vanishes and g = 0"),
            [
                (POW2, yes("f# <= 1/(2|1-z|^2) and 1-|z| <= |1-z|, so f#/phi <= 1/2")),
                (POW15, no("on z = 1-d the ratio is d^1.5/(2d^2) -> infinity")),
            ],
            None,
        ),
        entry(
            "exp-i-cusp-shear",
            "exp(i/(1-z))",
            Some("z^2/4"),
            no("|g'| <= 1/2 and |f| <= |h| + 1/4, so the real-radius blow-up of the cusp persists"),
            no("at z = 0.9i, |h'| = exp(-0.497)/1.81 ~ 0.336 < |g'| = 0.45"),
            [
                (POW2, yes("1+|h|^2 <= 2(1+|f|^2), so f#/phi <= 2(1/2) + 1/2")),
                (POW15, no("on z = 1-d, |f| <= 5/4 while |h'| = 1/d^2")),
            ],
            Some(Complex64::new(0.0, 0.9)),
        ),
        entry(
            "reversing",
            "z",
            Some("2*z"),
            yes("|h'| + |g'| = 3, so the functional is at most 3"),
            no("J = 1 - 4 = -3"),
            bounded_phi("f# <= 3 and phi >= 1"),
            Some(Complex64::new(0.0, 0.0)),
        ),
        entry(
            "square",
            "z^2",
            None,
            yes("|h'| = 2|z| <= 2"),
            no("h'(0) = 0"),
            bounded_phi("f# <= 2 and phi >= 1"),
            Some(Complex64::new(0.0, 0.0)),
        ),
    ]
}

pub fn lookup(name: &str) -> Option<CatalogEntry> {
    builtin_catalog().into_iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups() {
        assert_eq!(lookup("identity").unwrap().labels.normal.value, Label::Yes);
        assert_eq!(lookup("exp-i-cusp").unwrap().labels.normal.value, Label::No);
        assert!(lookup("nope").is_none());
    }

    #[test]
    fn provenance_present() {
        for e in builtin_catalog() {
            assert!(!e.labels.normal.provenance.is_empty());
            assert!(!e.labels.sense_preserving.provenance.is_empty());
            assert!(e
                .labels
                .phi_normal
                .values()
                .all(|l| !l.provenance.is_empty()));
        }
    }

    #[test]
    fn witnesses_fail_lewy() {
        for e in builtin_catalog() {
            if let Some(w) = e.labels.sense_witness {
                let chk = e.map.is_sense_preserving(&[w]).unwrap();
                assert!(!chk.preserving, "{}", e.name);
                assert_eq!(e.labels.sense_preserving.value, Label::No);
            }
        }
    }

    #[test]
    fn names_unique() {
        let cat = builtin_catalog();
        let mut names: Vec<_> = cat.iter().map(|e| e.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), cat.len());
    }
}
