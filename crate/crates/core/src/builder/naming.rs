use std::collections::{BTreeMap, BTreeSet};

use crate::extract::TokenizedPoint;

/// Whitespace becomes `_`; anything outside `[A-Za-z0-9_-]` is dropped.
pub fn sanitize_local(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    for c in label.chars() {
        if c.is_whitespace() {
            out.push('_');
        } else if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
            out.push(c);
        }
    }
    if out.starts_with('-') {
        out.insert(0, '_');
    }
    out
}

/// Point code → local name, unique across points and distinct from the
/// reserved equipment/location names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PointNames {
    by_code: BTreeMap<String, String>,
}

impl PointNames {
    pub fn mint<'a>(points: impl IntoIterator<Item = &'a TokenizedPoint>, reserved: &BTreeSet<String>) -> Self {
        let mut used: BTreeSet<String> = BTreeSet::new();
        let mut by_code = BTreeMap::new();
        for tp in points {
            let mut name = sanitize_local(&tp.label);
            if name.is_empty() {
                name = format!("Point_{}", tp.code.replace('.', "_"));
            }
            if reserved.contains(&name) {
                name.push_str("_Point");
            }
            let mut candidate = name.clone();
            let mut n = 2;
            while used.contains(&candidate) || reserved.contains(&candidate) {
                candidate = format!("{name}_{n}");
                n += 1;
            }
            used.insert(candidate.clone());
            by_code.insert(tp.code.clone(), candidate);
        }
        PointNames { by_code }
    }

    pub fn get(&self, code: &str) -> Option<&str> {
        self.by_code.get(code).map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(code: &str, label: &str) -> TokenizedPoint {
        TokenizedPoint {
            code: code.into(),
            label: label.into(),
            ..Default::default()
        }
    }

    #[test]
    fn sanitizes_labels() {
        assert_eq!(
            sanitize_local("10F_536_Locker_Room_in_library_On_Off_Status"),
            "10F_536_Locker_Room_in_library_On_Off_Status"
        );
        assert_eq!(sanitize_local("VAV-1 Supply Air (°C)"), "VAV-1_Supply_Air_C");
        assert_eq!(sanitize_local("-x"), "_-x");
        assert_eq!(sanitize_local("湿度"), "");
    }

    #[test]
    fn collisions_get_suffixes() {
        let reserved: BTreeSet<String> = ["AC_977".to_string()].into();
        let pts = [tp("1", "A B"), tp("2", "A_B"), tp("3", "AC_977"), tp("4", "湿度"), tp("5", "A B")];
        let names = PointNames::mint(&pts, &reserved);
        assert_eq!(names.get("1"), Some("A_B"));
        assert_eq!(names.get("2"), Some("A_B_2"));
        assert_eq!(names.get("3"), Some("AC_977_Point"));
        assert_eq!(names.get("4"), Some("Point_4"));
        assert_eq!(names.get("5"), Some("A_B_3"));
    }
}
