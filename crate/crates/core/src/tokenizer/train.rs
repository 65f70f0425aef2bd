use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::model::{log_sum_exp, UnigramModel};
use super::pretok::{is_semantic_pretoken, pretoken_spans, ALPHABET};
use super::vocab::MAX_SEMANTIC;
use super::TokenizerError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub target_semantic: usize,
    pub max_piece_len: usize,
    pub min_freq: u64,
    /// Seed vocabulary cap as a multiple of the target.
    pub seed_factor: usize,
    pub shrink: f64,
    pub em_iters: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            target_semantic: 3570,
            max_piece_len: 24,
            min_freq: 2,
            seed_factor: 20,
            shrink: 0.75,
            em_iters: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainRound {
    pub vocab_size: usize,
    /// Corpus log-likelihood before each EM update.
    pub log_likelihood: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainReport {
    pub rounds: Vec<TrainRound>,
}

/// Probability mass shared by alphabet symbols absent from the corpus.
const UNSEEN_MASS: f64 = 1e-4;

struct Trainer<'a> {
    corpus: &'a [(String, u64)],
    pieces: Vec<String>,
    logp: Vec<f64>,
    atomic: Vec<bool>,
    unseen: HashSet<String>,
    max_len: usize,
}

impl Trainer<'_> {
    fn index(&self) -> HashMap<&[u8], usize> {
        self.pieces
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_bytes(), i))
            .collect()
    }

    fn edges(&self, index: &HashMap<&[u8], usize>, s: &[u8]) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for i in 0..s.len() {
            for l in 1..=self.max_len.min(s.len() - i) {
                if let Some(&id) = index.get(&s[i..i + l]) {
                    if self.logp[id] > f64::NEG_INFINITY {
                        out.push((i, i + l, id));
                    }
                }
            }
        }
        out
    }

    /// One EM update; returns the log-likelihood under the parameters before it.
    fn em_step(&mut self) -> f64 {
        let index = self.index();
        let mut counts = vec![0.0f64; self.pieces.len()];
        let mut loglik = 0.0;
        for (text, c) in self.corpus {
            let s = text.as_bytes();
            let n = s.len();
            let edges = self.edges(&index, s);
            let mut fwd = vec![f64::NEG_INFINITY; n + 1];
            let mut bwd = vec![f64::NEG_INFINITY; n + 1];
            fwd[0] = 0.0;
            bwd[n] = 0.0;
            let mut into: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n + 1];
            let mut from: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n + 1];
            for &(a, b, id) in &edges {
                into[b].push((a, id));
                from[a].push((b, id));
            }
            for j in 1..=n {
                fwd[j] = log_sum_exp(into[j].iter().map(|&(a, id)| fwd[a] + self.logp[id]));
            }
            for i in (0..n).rev() {
                bwd[i] = log_sum_exp(from[i].iter().map(|&(b, id)| bwd[b] + self.logp[id]));
            }
            let z = fwd[n];
            loglik += *c as f64 * z;
            for &(a, b, id) in &edges {
                let post = (fwd[a] + self.logp[id] + bwd[b] - z).exp();
                counts[id] += *c as f64 * post;
            }
        }
        let total: f64 = counts.iter().sum();
        let n_unseen = self.unseen.len();
        let seen_mass = if n_unseen > 0 { 1.0 - UNSEEN_MASS } else { 1.0 };
        for (i, p) in self.pieces.iter().enumerate() {
            self.logp[i] = if self.unseen.contains(p) {
                (UNSEEN_MASS / n_unseen as f64).ln()
            } else if counts[i] > 0.0 {
                (seen_mass * counts[i] / total).ln()
            } else {
                f64::NEG_INFINITY
            };
        }
        loglik
    }

    /// Best segmentation score of `s`, optionally without piece `skip`.
    fn best(&self, index: &HashMap<&[u8], usize>, s: &[u8], skip: Option<usize>) -> (f64, Vec<usize>) {
        let n = s.len();
        let mut best = vec![f64::NEG_INFINITY; n + 1];
        let mut back = vec![(0usize, 0usize); n + 1];
        best[0] = 0.0;
        for (a, b, id) in self.edges(index, s) {
            if Some(id) == skip {
                continue;
            }
            let v = best[a] + self.logp[id];
            if v > best[b] {
                best[b] = v;
                back[b] = (a, id);
            }
        }
        let mut used = Vec::new();
        let mut j = n;
        while j > 0 && best[n] > f64::NEG_INFINITY {
            used.push(back[j].1);
            j = back[j].0;
        }
        (best[n], used)
    }

    /// Drops the pieces whose removal costs the least likelihood, keeping `keep`.
    fn prune(&mut self, keep: usize) {
        let index = self.index();
        let mut freq = vec![0.0f64; self.pieces.len()];
        for (text, c) in self.corpus {
            for id in self.best(&index, text.as_bytes(), None).1 {
                freq[id] += *c as f64;
            }
        }
        let mut loss: Vec<(f64, usize)> = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            if self.atomic[i] {
                continue;
            }
            let l = if freq[i] > 0.0 {
                let alt = self.best(&index, p.as_bytes(), Some(i)).0;
                freq[i] * (self.logp[i] - alt)
            } else {
                0.0
            };
            loss.push((l, i));
        }
        let n_atomic = self.atomic.iter().filter(|a| **a).count();
        let n_drop = self.pieces.len().saturating_sub(keep.max(n_atomic));
        loss.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then_with(|| self.pieces[a.1].len().cmp(&self.pieces[b.1].len()))
                .then_with(|| self.pieces[a.1].cmp(&self.pieces[b.1]))
        });
        let drop: HashSet<usize> = loss.iter().take(n_drop).map(|x| x.1).collect();
        let mut i = 0;
        self.pieces.retain(|_| {
            i += 1;
            !drop.contains(&(i - 1))
        });
        let mut i = 0;
        self.logp.retain(|_| {
            i += 1;
            !drop.contains(&(i - 1))
        });
        let mut i = 0;
        self.atomic.retain(|_| {
            i += 1;
            !drop.contains(&(i - 1))
        });
    }
}

/// Counts the semantic pretokens (with their leading space) of every document.
fn pretoken_counts<S: AsRef<str>>(corpus: &[S]) -> Vec<(String, u64)> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for doc in corpus {
        for p in pretoken_spans(doc.as_ref()) {
            if is_semantic_pretoken(&p) {
                *counts.entry(p).or_default() += 1;
            }
        }
    }
    counts.into_iter().collect()
}

/// Fits a unigram piece model over interval pieces of InterMo texts.
pub fn train_unigram<S: AsRef<str>>(
    corpus: &[S],
    cfg: &TrainConfig,
) -> Result<(UnigramModel, TrainReport), TokenizerError> {
    let n_alpha = ALPHABET.chars().count();
    if cfg.target_semantic < n_alpha || cfg.target_semantic > MAX_SEMANTIC {
        return Err(TokenizerError::Config(format!(
            "target {} outside [{n_alpha}, {MAX_SEMANTIC}]",
            cfg.target_semantic
        )));
    }
    if !(cfg.shrink > 0.0 && cfg.shrink < 1.0) || cfg.max_piece_len == 0 || cfg.em_iters == 0 {
        return Err(TokenizerError::Config("invalid training parameters".into()));
    }
    let counts = pretoken_counts(corpus);
    if counts.is_empty() {
        return Err(TokenizerError::EmptyCorpus);
    }

    // seeds: frequent substrings that never cross a pretoken border
    let mut subs: HashMap<&str, u64> = HashMap::new();
    let mut chars: HashMap<char, u64> = HashMap::new();
    for (p, c) in &counts {
        for ch in p.chars() {
            *chars.entry(ch).or_default() += c;
        }
        for i in 0..p.len() {
            for l in 2..=cfg.max_piece_len.min(p.len() - i) {
                *subs.entry(&p[i..i + l]).or_default() += c;
            }
        }
    }
    let mut seeds: Vec<(&str, u64)> = subs.into_iter().filter(|s| s.1 >= cfg.min_freq).collect();
    seeds.sort_by(|a, b| b.1.cmp(&a.1).then(b.0.len().cmp(&a.0.len())).then(a.0.cmp(b.0)));
    seeds.truncate((cfg.seed_factor * cfg.target_semantic).saturating_sub(n_alpha));

    let mut pieces = Vec::new();
    let mut weights = Vec::new();
    let mut atomic = Vec::new();
    let mut unseen = HashSet::new();
    for ch in ALPHABET.chars() {
        let c = chars.get(&ch).copied().unwrap_or(0);
        if c == 0 {
            unseen.insert(ch.to_string());
        }
        pieces.push(ch.to_string());
        weights.push(c.max(1) as f64);
        atomic.push(true);
    }
    for (s, c) in seeds {
        pieces.push(s.to_string());
        weights.push((c * s.len() as u64) as f64);
        atomic.push(false);
    }
    let total: f64 = weights.iter().sum();
    let mut t = Trainer {
        corpus: &counts,
        max_len: pieces.iter().map(String::len).max().unwrap_or(1),
        logp: weights.iter().map(|w| (w / total).ln()).collect(),
        pieces,
        atomic,
        unseen,
    };

    let mut report = TrainReport::default();
    loop {
        let mut round = TrainRound {
            vocab_size: t.pieces.len(),
            log_likelihood: Vec::new(),
        };
        for _ in 0..cfg.em_iters {
            round.log_likelihood.push(t.em_step());
        }
        report.rounds.push(round);
        // pieces that lost all their mass are gone for good
        let dead: Vec<bool> = t.logp.iter().map(|l| *l == f64::NEG_INFINITY).collect();
        if dead.iter().any(|d| *d) {
            let mut i = 0;
            t.pieces.retain(|_| {
                i += 1;
                !dead[i - 1]
            });
            t.atomic = t.atomic.iter().zip(&dead).filter(|(_, d)| !**d).map(|(a, _)| *a).collect();
            t.logp.retain(|l| *l > f64::NEG_INFINITY);
        }
        if t.pieces.len() <= cfg.target_semantic {
            break;
        }
        let keep = ((t.pieces.len() as f64) * cfg.shrink).floor() as usize;
        t.prune(keep.max(cfg.target_semantic));
    }
    let model = UnigramModel::with_log_probs(t.pieces.into_iter().zip(t.logp).collect())?;
    Ok((model, report))
}
