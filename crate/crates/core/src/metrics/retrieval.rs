use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::MetricsError;

/// All contiguous windows of `n` tokens; empty when `n` is 0 or exceeds the length.
pub fn shingle<T: Ord + Clone>(tokens: &[T], n: usize) -> BTreeSet<Vec<T>> {
    if n == 0 {
        return BTreeSet::new();
    }
    tokens.windows(n).map(<[T]>::to_vec).collect()
}

/// Jaccard similarity; two empty sets score 0.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalItem {
    pub id: String,
    pub tokens: Vec<String>,
    pub work: String,
    pub performer: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RetrievalCorpus {
    pub items: Vec<RetrievalItem>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relevance {
    Work,
    Performer,
}

impl std::str::FromStr for Relevance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "work" => Ok(Relevance::Work),
            "performer" => Ok(Relevance::Performer),
            _ => Err(format!("unknown relevance {s:?}")),
        }
    }
}

impl RetrievalItem {
    fn label(&self, r: Relevance) -> &str {
        match r {
            Relevance::Work => &self.work,
            Relevance::Performer => &self.performer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapReport {
    pub n: usize,
    pub map: f64,
    pub n_queries: usize,
    /// Items without any relevant counterpart.
    pub excluded: Vec<String>,
}

/// Average precision of one ranked relevance list.
pub fn average_precision(ranked_relevant: &[bool]) -> f64 {
    let mut hits = 0;
    let mut sum = 0.0;
    for (k, rel) in ranked_relevant.iter().enumerate() {
        if *rel {
            hits += 1;
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    if hits == 0 {
        0.0
    } else {
        sum / hits as f64
    }
}

/// Mean average precision where each item queries all the others, ranked by Jaccard
/// similarity of `n`-gram shingles (ties by id).
pub fn map_retrieval(corpus: &RetrievalCorpus, n: usize, relevance: Relevance) -> Result<MapReport, MetricsError> {
    if n == 0 {
        return Err(MetricsError::Config("shingle size must be at least 1".into()));
    }
    let items = &corpus.items;
    let sets: Vec<BTreeSet<Vec<String>>> = items.iter().map(|it| shingle(&it.tokens, n)).collect();
    let mut excluded = Vec::new();
    let mut aps = Vec::new();
    for (q, item) in items.iter().enumerate() {
        let label = item.label(relevance);
        if !items
            .iter()
            .enumerate()
            .any(|(j, o)| j != q && o.label(relevance) == label)
        {
            excluded.push(item.id.clone());
            continue;
        }
        let mut others: Vec<(f64, &str, bool)> = items
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != q)
            .map(|(j, o)| (jaccard(&sets[q], &sets[j]), o.id.as_str(), o.label(relevance) == label))
            .collect();
        others.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        let ranked: Vec<bool> = others.iter().map(|o| o.2).collect();
        aps.push(average_precision(&ranked));
    }
    if aps.is_empty() {
        return Err(MetricsError::NoQueries);
    }
    Ok(MapReport {
        n,
        map: aps.iter().sum::<f64>() / aps.len() as f64,
        n_queries: aps.len(),
        excluded,
    })
}
