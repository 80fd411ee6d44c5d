//! The topic catalog conversations are generated for.

use std::sync::OnceLock;

const TOPICS: &str = include_str!("../../assets/topics.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicArea {
    pub name: String,
    pub topics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicCatalog {
    areas: Vec<TopicArea>,
}

impl TopicCatalog {
    /// Parses `area<TAB>topic` lines; areas keep first-seen order.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut areas: Vec<TopicArea> = Vec::new();
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let (area, topic) = line
                .split_once('\t')
                .ok_or_else(|| format!("line {}: expected area<TAB>topic", n + 1))?;
            let (area, topic) = (area.trim(), topic.trim());
            if area.is_empty() || topic.is_empty() {
                return Err(format!("line {}: empty field", n + 1));
            }
            match areas.iter_mut().find(|a| a.name == area) {
                Some(a) => a.topics.push(topic.to_string()),
                None => areas.push(TopicArea {
                    name: area.to_string(),
                    topics: vec![topic.to_string()],
                }),
            }
        }
        Ok(Self { areas })
    }

    pub fn builtin() -> &'static TopicCatalog {
        static CATALOG: OnceLock<TopicCatalog> = OnceLock::new();
        CATALOG.get_or_init(|| TopicCatalog::parse(TOPICS).expect("bundled topic list parses"))
    }

    pub fn areas(&self) -> &[TopicArea] {
        &self.areas
    }

    pub fn area(&self, name: &str) -> Option<&TopicArea> {
        self.areas.iter().find(|a| a.name == name)
    }

    pub fn has_area(&self, name: &str) -> bool {
        self.area(name).is_some()
    }

    /// Area of a topic, if catalogued.
    pub fn area_of(&self, topic: &str) -> Option<&str> {
        self.areas
            .iter()
            .find(|a| a.topics.iter().any(|t| t == topic))
            .map(|a| a.name.as_str())
    }

    pub fn len(&self) -> usize {
        self.areas.iter().map(|a| a.topics.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (area, topic) pairs in catalog order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.areas
            .iter()
            .flat_map(|a| a.topics.iter().map(move |t| (a.name.as_str(), t.as_str())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_counts() {
        let c = TopicCatalog::builtin();
        let counts: Vec<(&str, usize)> = c.areas().iter().map(|a| (a.name.as_str(), a.topics.len())).collect();
        assert_eq!(
            counts,
            [
                ("Food", 36),
                ("Books", 43),
                ("Movies", 44),
                ("TV shows", 31),
                ("Music", 45),
                ("Hobbies", 34),
                ("English learning", 10)
            ]
        );
        assert_eq!(c.len(), 243);
        assert_eq!(c.iter().count(), 243);
    }

    #[test]
    fn parse_errors() {
        assert!(TopicCatalog::parse("Food\n").is_err());
        assert!(TopicCatalog::parse("Food\t \n").is_err());
    }
}
