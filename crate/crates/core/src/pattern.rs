//! String pattern detection: fixed detector order with a 95% match threshold,
//! falling back to a generic length/character-class profile.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Fraction of samples a specific detector must match to win.
pub const MATCH_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternId {
    Uuid,
    Iso8601,
    Email,
    NumericString,
    Hex,
    Generic,
}

impl PatternId {
    pub fn as_str(self) -> &'static str {
        match self {
            PatternId::Uuid => "uuid",
            PatternId::Iso8601 => "iso8601",
            PatternId::Email => "email",
            PatternId::NumericString => "numeric-string",
            PatternId::Hex => "hex",
            PatternId::Generic => "generic",
        }
    }

    pub fn parse(s: &str) -> Option<PatternId> {
        Some(match s {
            "uuid" => PatternId::Uuid,
            "iso8601" => PatternId::Iso8601,
            "email" => PatternId::Email,
            "numeric-string" => PatternId::NumericString,
            "hex" => PatternId::Hex,
            "generic" => PatternId::Generic,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CharClass {
    Lower,
    Upper,
    Digit,
    Space,
    Punct,
    Other,
}

impl CharClass {
    pub fn of(ch: char) -> CharClass {
        if ch.is_ascii_lowercase() {
            CharClass::Lower
        } else if ch.is_ascii_uppercase() {
            CharClass::Upper
        } else if ch.is_ascii_digit() {
            CharClass::Digit
        } else if ch.is_whitespace() {
            CharClass::Space
        } else if ch.is_ascii_punctuation() {
            CharClass::Punct
        } else {
            CharClass::Other
        }
    }
}

/// Detected string format. Specific ids carry no parameters; the generic
/// fallback carries length and character-class histograms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSpec {
    pub pattern_id: PatternId,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub length_hist: Option<BTreeMap<usize, u64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub char_classes: Option<BTreeMap<CharClass, u64>>,
}

pub fn is_uuid(s: &str) -> bool {
    let bytes = s.as_bytes();
    if bytes.len() != 36 {
        return false;
    }
    for (i, &b) in bytes.iter().enumerate() {
        match i {
            8 | 13 | 18 | 23 => {
                if b != b'-' {
                    return false;
                }
            }
            _ => {
                if !b.is_ascii_hexdigit() {
                    return false;
                }
            }
        }
    }
    true
}

fn all_digits(s: &str, range: std::ops::Range<usize>) -> bool {
    s.get(range)
        .map(|part| !part.is_empty() && part.bytes().all(|b| b.is_ascii_digit()))
        .unwrap_or(false)
}

/// Accepts `YYYY-MM-DD` and `YYYY-MM-DDThh:mm:ss` with optional `Z` or
/// fractional seconds.
pub fn is_iso8601(s: &str) -> bool {
    let b = s.as_bytes();
    if b.len() < 10 {
        return false;
    }
    if !(all_digits(s, 0..4) && b[4] == b'-' && all_digits(s, 5..7) && b[7] == b'-' && all_digits(s, 8..10)) {
        return false;
    }
    let month: u32 = s[5..7].parse().unwrap_or(0);
    let day: u32 = s[8..10].parse().unwrap_or(0);
    if !(1..=12).contains(&month) || !(1..=31).contains(&day) {
        return false;
    }
    if b.len() == 10 {
        return true;
    }
    if b[10] != b'T' && b[10] != b' ' {
        return false;
    }
    if b.len() < 19 {
        return false;
    }
    if !(all_digits(s, 11..13) && b[13] == b':' && all_digits(s, 14..16) && b[16] == b':' && all_digits(s, 17..19)) {
        return false;
    }
    let rest = &s[19..];
    rest.is_empty()
        || rest == "Z"
        || (rest.starts_with('.')
            && rest[1..].trim_end_matches('Z').bytes().all(|c| c.is_ascii_digit()))
        || (rest.starts_with('+') || rest.starts_with('-'))
}

pub fn is_email(s: &str) -> bool {
    let Some((local, domain)) = s.split_once('@') else {
        return false;
    };
    !local.is_empty()
        && !domain.is_empty()
        && domain.contains('.')
        && !domain.starts_with('.')
        && !domain.ends_with('.')
        && !s.chars().any(char::is_whitespace)
}

pub fn is_numeric_string(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

pub fn is_hex(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_hexdigit())
}

pub fn matches_pattern(id: PatternId, s: &str) -> bool {
    match id {
        PatternId::Uuid => is_uuid(s),
        PatternId::Iso8601 => is_iso8601(s),
        PatternId::Email => is_email(s),
        PatternId::NumericString => is_numeric_string(s),
        PatternId::Hex => is_hex(s),
        PatternId::Generic => true,
    }
}

const DETECTOR_ORDER: [PatternId; 5] = [
    PatternId::Uuid,
    PatternId::Iso8601,
    PatternId::Email,
    PatternId::NumericString,
    PatternId::Hex,
];

/// Builds the generic length/character-class profile of a sample set.
pub fn generic_profile(samples: &[impl AsRef<str>]) -> PatternSpec {
    let mut length_hist: BTreeMap<usize, u64> = BTreeMap::new();
    let mut char_classes: BTreeMap<CharClass, u64> = BTreeMap::new();
    for s in samples {
        let s = s.as_ref();
        *length_hist.entry(s.chars().count()).or_insert(0) += 1;
        for ch in s.chars() {
            *char_classes.entry(CharClass::of(ch)).or_insert(0) += 1;
        }
    }
    PatternSpec {
        pattern_id: PatternId::Generic,
        length_hist: Some(length_hist),
        char_classes: Some(char_classes),
    }
}

/// First detector in fixed order matching at least 95% of samples wins;
/// otherwise the generic profile is returned.
pub fn detect_pattern(samples: &[impl AsRef<str>]) -> PatternSpec {
    if !samples.is_empty() {
        let n = samples.len() as f64;
        for id in DETECTOR_ORDER {
            let matched = samples
                .iter()
                .filter(|s| matches_pattern(id, s.as_ref()))
                .count() as f64;
            if matched / n >= MATCH_THRESHOLD {
                return PatternSpec {
                    pattern_id: id,
                    length_hist: None,
                    char_classes: None,
                };
            }
        }
    }
    generic_profile(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uuid_samples_detected() {
        let samples: Vec<String> = (0..100)
            .map(|i| format!("{:08x}-{:04x}-4{:03x}-a{:03x}-{:012x}", i, i, i, i, i))
            .collect();
        let spec = detect_pattern(&samples);
        assert_eq!(spec.pattern_id, PatternId::Uuid);
        assert!(spec.length_hist.is_none());
    }

    #[test]
    fn numeric_strings_detected() {
        let spec = detect_pattern(&["12345", "999"]);
        assert_eq!(spec.pattern_id, PatternId::NumericString);
    }

    #[test]
    fn numeric_wins_over_hex_by_order() {
        // all-digit strings are also valid hex; numeric-string is checked first
        let spec = detect_pattern(&["123", "456", "789"]);
        assert_eq!(spec.pattern_id, PatternId::NumericString);
    }

    #[test]
    fn mixed_falls_back_to_generic_with_histograms() {
        let spec = detect_pattern(&["abc", "12-x", "!!"]);
        assert_eq!(spec.pattern_id, PatternId::Generic);
        let lengths = spec.length_hist.unwrap();
        assert_eq!(lengths.get(&3), Some(&1));
        assert_eq!(lengths.get(&4), Some(&1));
        assert_eq!(lengths.get(&2), Some(&1));
        let classes = spec.char_classes.unwrap();
        assert_eq!(classes.get(&CharClass::Lower), Some(&4));
        assert_eq!(classes.get(&CharClass::Digit), Some(&2));
        assert_eq!(classes.get(&CharClass::Punct), Some(&3));
    }

    #[test]
    fn below_threshold_is_not_specific() {
        // 90 uuids + 10 plain strings: 90% < 95% threshold
        let mut samples: Vec<String> = (0..90)
            .map(|i| format!("{:08x}-{:04x}-4{:03x}-a{:03x}-{:012x}", i, i, i, i, i))
            .collect();
        samples.extend((0..10).map(|i| format!("plain{i}")));
        let spec = detect_pattern(&samples);
        assert_eq!(spec.pattern_id, PatternId::Generic);
    }

    #[test]
    fn iso8601_variants() {
        assert!(is_iso8601("2024-01-31"));
        assert!(is_iso8601("2024-01-31T12:30:05"));
        assert!(is_iso8601("2024-01-31T12:30:05Z"));
        assert!(is_iso8601("2024-01-31T12:30:05.123Z"));
        assert!(!is_iso8601("2024-13-01"));
        assert!(!is_iso8601("not-a-date"));
    }

    #[test]
    fn email_shapes() {
        assert!(is_email("a@b.co"));
        assert!(!is_email("a@b"));
        assert!(!is_email("@b.co"));
        assert!(!is_email("a b@c.co"));
    }
}
