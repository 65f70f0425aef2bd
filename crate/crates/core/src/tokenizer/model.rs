use std::collections::HashMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::pretok::pretoken_spans;
use super::vocab::{
    byte_token_name, partition_of, special_id, special_str, Partition, MAX_SEMANTIC, SEMANTIC_START,
    VOCAB_SIZE,
};
use super::TokenizerError;

/// Default sampling temperature for regularized segmentation.
pub const DEFAULT_ALPHA: f64 = 0.25;

/// Log-probability penalty of a fallback byte below the rarest piece.
const BYTE_PENALTY: f64 = 10.0;

pub const MODEL_FORMAT: &str = "intermo-unigram";
pub const MODEL_VERSION: u32 = 1;

/// Unigram piece table. Piece `i` has id `SEMANTIC_START + i`; pieces are kept in
/// descending probability order.
#[derive(Debug, Clone, PartialEq)]
pub struct UnigramModel {
    pieces: Vec<(String, f64)>,
    pub alpha: f64,
    index: HashMap<Box<[u8]>, u32>,
    max_len: usize,
    byte_logp: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    alpha: f64,
    tokens: Vec<TokenEntry>,
}

#[derive(Serialize, Deserialize)]
struct TokenEntry {
    id: u32,
    piece: String,
    partition: Partition,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    log_prob: Option<f64>,
}

/// One edge of a segmentation lattice.
#[derive(Clone, Copy)]
struct Edge {
    from: usize,
    to: usize,
    id: u32,
    score: f64,
}

impl UnigramModel {
    /// Builds a model from `(piece, probability weight)` pairs; weights are normalized.
    pub fn from_pieces(pieces: Vec<(String, f64)>) -> Result<Self, TokenizerError> {
        if pieces.len() > MAX_SEMANTIC {
            return Err(TokenizerError::Config(format!(
                "{} pieces exceed the {MAX_SEMANTIC} semantic slots",
                pieces.len()
            )));
        }
        let total: f64 = pieces.iter().map(|p| p.1).sum();
        if !(total > 0.0) || pieces.iter().any(|p| !(p.1 > 0.0) || p.0.is_empty()) {
            return Err(TokenizerError::Config("piece weights must be positive".into()));
        }
        let pieces = pieces.into_iter().map(|(s, w)| (s, (w / total).ln())).collect();
        Self::from_log_probs(pieces, DEFAULT_ALPHA)
    }

    fn from_log_probs(mut pieces: Vec<(String, f64)>, alpha: f64) -> Result<Self, TokenizerError> {
        pieces.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let mut index = HashMap::new();
        for (i, (s, _)) in pieces.iter().enumerate() {
            let key: Box<[u8]> = s.as_bytes().into();
            if index.insert(key, SEMANTIC_START + i as u32).is_some() {
                return Err(TokenizerError::Config(format!("duplicate piece {s:?}")));
            }
        }
        let max_len = pieces.iter().map(|p| p.0.len()).max().unwrap_or(1);
        let min = pieces.iter().map(|p| p.1).fold(0.0, f64::min);
        Ok(UnigramModel {
            pieces,
            alpha,
            index,
            max_len,
            byte_logp: min - BYTE_PENALTY,
        })
    }

    pub fn pieces(&self) -> &[(String, f64)] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn piece_id(&self, piece: &str) -> Option<u32> {
        self.index.get(piece.as_bytes()).copied()
    }

    /// Text of any id, or `None` past the vocabulary.
    pub fn token_str(&self, id: u32) -> Option<String> {
        match partition_of(id)? {
            Partition::Byte => Some(byte_token_name(id as u8)),
            Partition::Semantic => self.pieces.get((id - SEMANTIC_START) as usize).map(|p| p.0.clone()),
            _ => special_str(id).map(str::to_string),
        }
    }

    fn lattice(&self, s: &[u8]) -> Vec<Edge> {
        let mut edges = Vec::new();
        for i in 0..s.len() {
            let mut single = false;
            for l in 1..=self.max_len.min(s.len() - i) {
                if let Some(&id) = self.index.get(&s[i..i + l]) {
                    single |= l == 1;
                    edges.push(Edge {
                        from: i,
                        to: i + l,
                        id,
                        score: self.pieces[(id - SEMANTIC_START) as usize].1,
                    });
                }
            }
            if !single {
                edges.push(Edge {
                    from: i,
                    to: i + 1,
                    id: s[i] as u32,
                    score: self.byte_logp,
                });
            }
        }
        edges
    }

    fn viterbi(&self, s: &[u8], out: &mut Vec<u32>) {
        let n = s.len();
        let edges = self.lattice(s);
        let mut best = vec![f64::NEG_INFINITY; n + 1];
        let mut back: Vec<Option<Edge>> = vec![None; n + 1];
        best[0] = 0.0;
        // edges are ordered by start, so every prefix is final before it is extended
        for e in &edges {
            let v = best[e.from] + e.score;
            if v > best[e.to] {
                best[e.to] = v;
                back[e.to] = Some(*e);
            }
        }
        let start = out.len();
        let mut j = n;
        while j > 0 {
            let e = back[j].expect("lattice covers every position");
            out.push(e.id);
            j = e.from;
        }
        out[start..].reverse();
    }

    fn sample<R: Rng + ?Sized>(&self, s: &[u8], alpha: f64, rng: &mut R, out: &mut Vec<u32>) {
        let n = s.len();
        let edges = self.lattice(s);
        let mut into: Vec<Vec<Edge>> = vec![Vec::new(); n + 1];
        for e in edges {
            into[e.to].push(e);
        }
        let mut fwd = vec![f64::NEG_INFINITY; n + 1];
        fwd[0] = 0.0;
        for j in 1..=n {
            fwd[j] = log_sum_exp(into[j].iter().map(|e| fwd[e.from] + alpha * e.score));
        }
        let start = out.len();
        let mut j = n;
        while j > 0 {
            let weights: Vec<f64> = into[j]
                .iter()
                .map(|e| (fwd[e.from] + alpha * e.score - fwd[j]).exp())
                .collect();
            let mut u: f64 = rng.gen::<f64>() * weights.iter().sum::<f64>();
            let mut pick = into[j].len() - 1;
            for (k, w) in weights.iter().enumerate() {
                if u < *w {
                    pick = k;
                    break;
                }
                u -= w;
            }
            let e = into[j][pick];
            out.push(e.id);
            j = e.from;
        }
        out[start..].reverse();
    }

    /// Most likely segmentation of each pretoken; reserved tokens map to their ids.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        let mut out = Vec::new();
        for p in pretoken_spans(text) {
            match special_id(&p) {
                Some(id) => out.push(id),
                None => self.viterbi(p.as_bytes(), &mut out),
            }
        }
        out
    }

    /// Segmentation drawn from the posterior with scores scaled by `alpha`.
    pub fn encode_sampled<R: Rng + ?Sized>(&self, text: &str, alpha: f64, rng: &mut R) -> Vec<u32> {
        let mut out = Vec::new();
        for p in pretoken_spans(text) {
            match special_id(&p) {
                Some(id) => out.push(id),
                None => self.sample(p.as_bytes(), alpha, rng, &mut out),
            }
        }
        out
    }

    pub fn decode(&self, ids: &[u32]) -> Result<String, TokenizerError> {
        let mut bytes = Vec::new();
        for &id in ids {
            match partition_of(id) {
                Some(Partition::Byte) => bytes.push(id as u8),
                Some(Partition::Semantic) => {
                    let (s, _) = self
                        .pieces
                        .get((id - SEMANTIC_START) as usize)
                        .ok_or(TokenizerError::UnknownId(id))?;
                    bytes.extend_from_slice(s.as_bytes());
                }
                Some(_) => bytes.extend_from_slice(special_str(id).unwrap_or_default().as_bytes()),
                None => return Err(TokenizerError::UnknownId(id)),
            }
        }
        let text = String::from_utf8_lossy(&bytes).into_owned();
        Ok(match text.strip_prefix(' ') {
            Some(rest) => rest.to_string(),
            None => text,
        })
    }

    /// Log-probability of a segmentation (reserved tokens score zero).
    pub fn score(&self, ids: &[u32]) -> f64 {
        ids.iter()
            .map(|&id| match partition_of(id) {
                Some(Partition::Byte) => self.byte_logp,
                Some(Partition::Semantic) => self
                    .pieces
                    .get((id - SEMANTIC_START) as usize)
                    .map_or(f64::NEG_INFINITY, |p| p.1),
                _ => 0.0,
            })
            .sum()
    }

    pub fn to_json(&self) -> String {
        let mut tokens = Vec::with_capacity(VOCAB_SIZE as usize);
        for id in 0..SEMANTIC_START + self.pieces.len() as u32 {
            let partition = partition_of(id).expect("id inside vocabulary");
            let log_prob = (partition == Partition::Semantic)
                .then(|| self.pieces[(id - SEMANTIC_START) as usize].1);
            tokens.push(TokenEntry {
                id,
                piece: self.token_str(id).unwrap_or_default(),
                partition,
                log_prob,
            });
        }
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            alpha: self.alpha,
            tokens,
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, TokenizerError> {
        let file: ModelFile =
            serde_json::from_str(s).map_err(|e| TokenizerError::Model(e.to_string()))?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(TokenizerError::Model(format!(
                "unsupported model {} v{}",
                file.format, file.version
            )));
        }
        let mut pieces = Vec::new();
        for t in file.tokens {
            if partition_of(t.id) != Some(t.partition) {
                return Err(TokenizerError::Model(format!("token {} in wrong partition", t.id)));
            }
            if t.partition == Partition::Semantic {
                let lp = t
                    .log_prob
                    .ok_or_else(|| TokenizerError::Model(format!("piece {} lacks log_prob", t.id)))?;
                pieces.push((t.piece, lp));
            }
        }
        Self::from_log_probs(pieces, file.alpha)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }

    pub fn load(path: &Path) -> Result<Self, TokenizerError> {
        let s = std::fs::read_to_string(path).map_err(|e| TokenizerError::Model(e.to_string()))?;
        Self::from_json(&s)
    }

    pub(crate) fn with_log_probs(pieces: Vec<(String, f64)>) -> Result<Self, TokenizerError> {
        Self::from_log_probs(pieces, DEFAULT_ALPHA)
    }
}

pub(crate) fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
