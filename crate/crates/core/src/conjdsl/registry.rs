use std::cmp::Ordering;
use std::sync::OnceLock;

use super::ast::{ConjectureSpec, Define, SourceFile};
use super::{parse_with, ParseError};

/// Registry sources in load order. The first file holds shared defines.
pub const BUILTIN_SOURCES: [(&str, &str); 5] = [
    ("prelude.cdsl", include_str!("../../registry/prelude.cdsl")),
    ("theorems.cdsl", include_str!("../../registry/theorems.cdsl")),
    ("section2.cdsl", include_str!("../../registry/section2.cdsl")),
    ("section3.cdsl", include_str!("../../registry/section3.cdsl")),
    ("remarks.cdsl", include_str!("../../registry/remarks.cdsl")),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    /// Defines visible to every entry.
    pub globals: Vec<Define>,
    pub entries: Vec<ConjectureSpec>,
    /// The parsed files, in load order.
    pub files: Vec<(String, SourceFile)>,
}

impl Registry {
    /// Load a set of sources; the defines of each file are visible to later files.
    pub fn load<'s>(sources: impl IntoIterator<Item = (&'s str, &'s str)>) -> Result<Registry, (String, ParseError)> {
        let mut reg = Registry { globals: vec![], entries: vec![], files: vec![] };
        for (name, src) in sources {
            let file = parse_with(src, &reg.globals).map_err(|e| (name.to_string(), e))?;
            reg.globals.extend(file.defines.iter().cloned());
            for e in &file.entries {
                if reg.entries.iter().any(|x| x.id == e.id) {
                    let err = ParseError::semantic(e.span, format!("duplicate entry id \"{}\"", e.id));
                    return Err((name.to_string(), err));
                }
            }
            reg.entries.extend(file.entries.iter().cloned());
            reg.files.push((name.to_string(), file));
        }
        reg.entries.sort_by(|a, b| natural_cmp(&a.id, &b.id));
        Ok(reg)
    }

    pub fn get(&self, id: &str) -> Option<&ConjectureSpec> {
        self.entries.iter().find(|e| e.id == id)
    }
}

/// The registry shipped with the crate.
pub fn builtin_registry() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(|| match Registry::load(BUILTIN_SOURCES) {
        Ok(r) => r,
        Err((file, e)) => panic!("builtin registry {file} is invalid: {e}"),
    })
}

/// Compare ids so that embedded numbers sort numerically ("2.9" < "2.10").
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut a, mut b) = (a.as_bytes(), b.as_bytes());
    loop {
        match (a.first(), b.first()) {
            (None, None) => return Ordering::Equal,
            (None, _) => return Ordering::Less,
            (_, None) => return Ordering::Greater,
            (Some(x), Some(y)) if x.is_ascii_digit() && y.is_ascii_digit() => {
                let la = a.iter().take_while(|c| c.is_ascii_digit()).count();
                let lb = b.iter().take_while(|c| c.is_ascii_digit()).count();
                let (na, nb) = (&a[..la], &b[..lb]);
                let strip = |s: &[u8]| -> usize { s.iter().take_while(|c| **c == b'0').count() };
                let (ta, tb) = (&na[strip(na)..], &nb[strip(nb)..]);
                let ord = ta.len().cmp(&tb.len()).then_with(|| ta.cmp(tb)).then_with(|| la.cmp(&lb));
                if ord != Ordering::Equal {
                    return ord;
                }
                a = &a[la..];
                b = &b[lb..];
            }
            (Some(x), Some(y)) => {
                if x != y {
                    return x.cmp(y);
                }
                a = &a[1..];
                b = &b[1..];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_loads() {
        if let Err((file, e)) = Registry::load(BUILTIN_SOURCES) {
            panic!("{file}: {e}");
        }
    }

    #[test]
    fn natural_order() {
        let mut ids = vec!["2.10", "2.9", "3.1", "2.1", "remark-2.1-b", "remark-2.1-a", "theorem-x"];
        ids.sort_by(|a, b| natural_cmp(a, b));
        assert_eq!(ids, vec!["2.1", "2.9", "2.10", "3.1", "remark-2.1-a", "remark-2.1-b", "theorem-x"]);
    }
}
