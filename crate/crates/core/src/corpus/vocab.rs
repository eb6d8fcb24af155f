use std::collections::BTreeSet;

const TAGS: &str = include_str!("../../resources/tags.txt");
const RELATION_TYPES: &str = include_str!("../../resources/relation_types.txt");

/// Declared tag and relation-type vocabularies. Labels outside them only
/// produce validation warnings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pub tags: BTreeSet<String>,
    pub relation_types: BTreeSet<String>,
}

impl Vocabulary {
    pub fn builtin() -> Self {
        Vocabulary {
            tags: parse_list(TAGS),
            relation_types: parse_list(RELATION_TYPES),
        }
    }

    pub fn from_lists(tags: &str, relation_types: &str) -> Self {
        Vocabulary {
            tags: parse_list(tags),
            relation_types: parse_list(relation_types),
        }
    }

    pub fn knows_tag(&self, tag: &str) -> bool {
        // `iptc::` and `slot::` tags come from open-ended taxonomies.
        self.tags.contains(tag) || tag.starts_with("iptc::") || tag.starts_with("slot::")
    }

    pub fn knows_relation(&self, kind: &str) -> bool {
        self.relation_types.contains(kind)
    }
}

fn parse_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_lists_are_seeded() {
        let v = Vocabulary::builtin();
        assert!(v.knows_tag("gpe0"));
        assert!(v.knows_tag("sport_player"));
        assert!(v.knows_tag("topic::politics"));
        assert!(!v.knows_tag("spaceship"));
        assert!(v.knows_relation("based_in0-x"));
        assert!(v.knows_relation("played_by"));
        assert!(!v.knows_relation("friend_of"));
    }
}
