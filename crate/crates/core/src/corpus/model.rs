use std::fmt;

use serde::{Deserialize, Serialize};

/// A contiguous token span `[begin, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Mention {
    pub begin: usize,
    pub end: usize,
}

impl Mention {
    pub const fn new(begin: usize, end: usize) -> Self {
        Mention { begin, end }
    }

    pub fn width(&self) -> usize {
        self.end.saturating_sub(self.begin)
    }

    pub fn is_well_formed(&self) -> bool {
        self.begin < self.end
    }

    /// Number of tokens strictly between two spans; 0 when they touch or overlap.
    pub fn token_gap(&self, other: &Mention) -> usize {
        other.begin.saturating_sub(self.end).max(self.begin.saturating_sub(other.end))
    }
}

impl From<(usize, usize)> for Mention {
    fn from((begin, end): (usize, usize)) -> Self {
        Mention { begin, end }
    }
}

impl From<Mention> for (usize, usize) {
    fn from(m: Mention) -> Self {
        (m.begin, m.end)
    }
}

impl fmt::Display for Mention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.begin, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    #[default]
    Unsplit,
}

/// Knowledge-base link of a cluster.
///
/// On disk an absent `link` field is [`Link::Unannotated`], an explicit
/// `null` is [`Link::Nil`], and a string is [`Link::Kb`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub enum Link {
    #[default]
    Unannotated,
    Nil,
    Kb(String),
}

impl Link {
    pub fn is_unannotated(&self) -> bool {
        matches!(self, Link::Unannotated)
    }

    pub fn kb_id(&self) -> Option<&str> {
        match self {
            Link::Kb(id) => Some(id),
            _ => None,
        }
    }
}

mod link_serde {
    use super::Link;
    use serde::{Deserialize, Deserializer, Serializer};

    // Only called when the field is present; absence is handled by `default`.
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Link, D::Error> {
        Ok(match Option::<String>::deserialize(d)? {
            Some(id) => Link::Kb(id),
            None => Link::Nil,
        })
    }

    pub fn serialize<S: Serializer>(link: &Link, s: S) -> Result<S::Ok, S::Error> {
        match link {
            Link::Kb(id) => s.serialize_str(id),
            Link::Nil | Link::Unannotated => s.serialize_none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityCluster {
    pub id: String,
    pub mentions: Vec<Mention>,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(
        default,
        skip_serializing_if = "Link::is_unannotated",
        with = "link_serde"
    )]
    pub link: Link,
}

impl EntityCluster {
    pub fn new(id: impl Into<String>, mentions: Vec<Mention>) -> Self {
        EntityCluster {
            id: id.into(),
            mentions,
            tags: Vec::new(),
            link: Link::Unannotated,
        }
    }

    pub fn with_tags<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.tags = tags.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_link(mut self, link: Link) -> Self {
        self.link = link;
        self
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t == tag)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RelationTriple {
    pub head: String,
    #[serde(rename = "type")]
    pub kind: String,
    pub tail: String,
}

impl RelationTriple {
    pub fn new(head: impl Into<String>, kind: impl Into<String>, tail: impl Into<String>) -> Self {
        RelationTriple {
            head: head.into(),
            kind: kind.into(),
            tail: tail.into(),
        }
    }
}

impl fmt::Display for RelationTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.kind, self.head, self.tail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default)]
    pub split: Split,
    #[serde(default)]
    pub tokens: Vec<String>,
    #[serde(default)]
    pub sentences: Vec<(usize, usize)>,
    #[serde(default)]
    pub clusters: Vec<EntityCluster>,
    #[serde(default)]
    pub relations: Vec<RelationTriple>,
}

impl Document {
    pub fn new(id: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            ..Default::default()
        }
    }

    /// Whitespace-separated tokens, one sentence spanning all of them.
    pub fn from_text(id: impl Into<String>, text: &str) -> Self {
        let tokens: Vec<String> = text.split_whitespace().map(str::to_owned).collect();
        let sentences = if tokens.is_empty() {
            Vec::new()
        } else {
            vec![(0, tokens.len())]
        };
        Document {
            id: id.into(),
            tokens,
            sentences,
            ..Default::default()
        }
    }

    pub fn cluster(&self, id: &str) -> Option<&EntityCluster> {
        self.clusters.iter().find(|c| c.id == id)
    }

    pub fn mention_count(&self) -> usize {
        self.clusters.iter().map(|c| c.mentions.len()).sum()
    }

    /// Index of the sentence containing token `token`, if any.
    pub fn sentence_of(&self, token: usize) -> Option<usize> {
        let idx = self.sentences.partition_point(|&(_, end)| end <= token);
        match self.sentences.get(idx) {
            Some(&(begin, end)) if begin <= token && token < end => Some(idx),
            _ => None,
        }
    }

    /// Surface string of a span, tokens joined by single spaces.
    pub fn surface(&self, m: &Mention) -> Option<String> {
        self.tokens.get(m.begin..m.end).map(|t| t.join(" "))
    }
}
