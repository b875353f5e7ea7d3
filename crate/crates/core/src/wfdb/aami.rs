use std::fmt;

use serde::{Deserialize, Serialize};

/// Arrhythmia classes used for the MIT-BIH task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AamiClass {
    N,
    S,
    V,
    Q,
}

impl AamiClass {
    pub const ALL: [AamiClass; 4] = [AamiClass::N, AamiClass::S, AamiClass::V, AamiClass::Q];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for AamiClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Diagnosis classes used for the PTB task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PtbClass {
    Healthy,
    #[serde(rename = "MI")]
    Mi,
}

impl PtbClass {
    pub fn index(self) -> usize {
        self as usize
    }

    /// Accepts `healthy`/`0` and `mi`/`1`, case-insensitively.
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "healthy" | "healthy control" | "0" => Some(PtbClass::Healthy),
            "mi" | "myocardial infarction" | "1" => Some(PtbClass::Mi),
            _ => None,
        }
    }
}

/// Outcome of mapping a WFDB annotation symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AamiMapping {
    Class(AamiClass),
    Skip,
}

/// The AAMI EC57 beat groups: (annotation name, WFDB symbol, class).
pub const AAMI_TABLE: [(&str, char, AamiClass); 14] = [
    ("Normal", 'N', AamiClass::N),
    ("Left bundle branch block", 'L', AamiClass::N),
    ("Right bundle branch block", 'R', AamiClass::N),
    ("Atrial escape", 'e', AamiClass::N),
    ("Nodal escape", 'j', AamiClass::N),
    ("Atrial premature", 'A', AamiClass::S),
    ("Aberrant atrial premature", 'a', AamiClass::S),
    ("Nodal premature", 'J', AamiClass::S),
    ("Supraventricular premature", 'S', AamiClass::S),
    ("Premature ventricular contraction", 'V', AamiClass::V),
    ("Ventricular escape", 'E', AamiClass::V),
    ("Paced", '/', AamiClass::Q),
    ("Fusion of paced and normal", 'f', AamiClass::Q),
    ("Unclassifiable", 'Q', AamiClass::Q),
];

/// Beat symbols outside the table; they fall into the unclassifiable group.
const OTHER_BEATS: [&str; 5] = ["F", "n", "B", "r", "?"];

/// Maps a WFDB beat symbol to its class, or `Skip` for non-beat annotations.
pub fn map_to_aami(symbol: &str) -> AamiMapping {
    let mut chars = symbol.chars();
    if let (Some(c), None) = (chars.next(), chars.next()) {
        if let Some(&(_, _, class)) = AAMI_TABLE.iter().find(|(_, s, _)| *s == c) {
            return AamiMapping::Class(class);
        }
    }
    if OTHER_BEATS.contains(&symbol) {
        AamiMapping::Class(AamiClass::Q)
    } else {
        AamiMapping::Skip
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn table_examples() {
        assert_eq!(map_to_aami("N"), AamiMapping::Class(AamiClass::N));
        assert_eq!(map_to_aami("/"), AamiMapping::Class(AamiClass::Q));
        assert_eq!(map_to_aami("A"), AamiMapping::Class(AamiClass::S));
        assert_eq!(map_to_aami("E"), AamiMapping::Class(AamiClass::V));
    }

    #[test]
    fn non_beats_skip_and_unlisted_beats_go_to_q() {
        for s in ["+", "~", "|", "\"", "x", "[", "!", ""] {
            assert_eq!(map_to_aami(s), AamiMapping::Skip, "{s:?}");
        }
        for s in ["F", "n", "B", "r", "?"] {
            assert_eq!(map_to_aami(s), AamiMapping::Class(AamiClass::Q));
        }
    }

    #[test]
    fn table_names_have_unique_symbols_and_classes_partition() {
        let symbols: HashSet<char> = AAMI_TABLE.iter().map(|t| t.1).collect();
        assert_eq!(symbols.len(), AAMI_TABLE.len());
        let names: HashSet<&str> = AAMI_TABLE.iter().map(|t| t.0).collect();
        assert_eq!(names.len(), AAMI_TABLE.len());
        for class in AamiClass::ALL {
            assert!(AAMI_TABLE.iter().any(|t| t.2 == class));
        }
    }

    #[test]
    fn ptb_labels() {
        assert_eq!(PtbClass::parse("MI"), Some(PtbClass::Mi));
        assert_eq!(PtbClass::parse(" Healthy "), Some(PtbClass::Healthy));
        assert_eq!(PtbClass::parse("bundle branch block"), None);
    }
}
