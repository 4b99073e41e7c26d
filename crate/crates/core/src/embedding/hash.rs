use twox_hash::XxHash64;

use super::{EmbeddingKind, EmbeddingMatrix};
use crate::textprep::tokenize;

const BUCKET_SEED: u64 = 0x5eed_0001;
const SIGN_SEED: u64 = 0x5eed_0002;

fn token_slot(token: &str, dim: usize) -> (usize, f64) {
    let bucket = (XxHash64::oneshot(BUCKET_SEED, token.as_bytes()) % dim as u64) as usize;
    let sign = if XxHash64::oneshot(SIGN_SEED, token.as_bytes()) & 1 == 0 {
        1.0
    } else {
        -1.0
    };
    (bucket, sign)
}

/// Signed feature hashing of tokens into `dim` buckets, L2-normalized.
///
/// Texts without tokens map to the unit basis vector e₁. Values depend only
/// on the token bytes, so vectors are identical on every platform.
pub fn hash_embed(texts: &[(String, String)], dim: usize, kind: EmbeddingKind) -> EmbeddingMatrix {
    let dim = dim.max(2);
    let mut ids = Vec::with_capacity(texts.len());
    let mut rows = Vec::with_capacity(texts.len());
    for (id, text) in texts {
        let mut v = vec![0.0; dim];
        for tok in tokenize(text) {
            let (b, s) = token_slot(&tok, dim);
            v[b] += s;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            log::warn!("text `{id}` hashed to a zero vector; using e1");
            v[0] = 1.0;
        } else {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        ids.push(id.clone());
        rows.push(v);
    }
    EmbeddingMatrix::new(ids, rows, dim, kind).expect("hash rows are finite and well-formed")
}
