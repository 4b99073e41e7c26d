use std::collections::BTreeMap;

use super::{
    class_term_weights, cluster_density, extract_keywords, term_distribution, DimensionReducer, Pca, Strategy, Topic,
    TopicAssignment, TopicError, TopicModelConfig, NOISE,
};
use crate::embedding::EmbeddingMatrix;
use crate::textprep::SanitizedDoc;

/// Fits a topic model with principal-components reduction.
pub fn fit(
    doc_emb: &EmbeddingMatrix,
    word_emb: Option<&EmbeddingMatrix>,
    sanitized: &[SanitizedDoc],
    config: &TopicModelConfig,
) -> Result<(TopicAssignment, Vec<Topic>), TopicError> {
    fit_with(&Pca, doc_emb, word_emb, sanitized, config)
}

fn reduce_and_cluster(
    reducer: &dyn DimensionReducer,
    points: &EmbeddingMatrix,
    config: &TopicModelConfig,
    min_cluster: usize,
) -> Result<Vec<i64>, TopicError> {
    if points.len() < min_cluster {
        return Ok(vec![NOISE; points.len()]);
    }
    let target = config.reduced_dim.min(points.dim());
    let reduced = reducer.reduce(points, target, config.seed)?;
    cluster_density(&reduced, min_cluster, config.min_samples_for(min_cluster))
}

fn n_clusters(labels: &[i64]) -> i64 {
    labels.iter().copied().max().unwrap_or(NOISE) + 1
}

/// Fits a topic model with a caller-chosen reducer.
///
/// Two-stage runs re-reduce and re-cluster each stage-1 cluster with the
/// smaller minimum size. A stage-1 cluster that does not split is kept whole.
pub fn fit_with(
    reducer: &dyn DimensionReducer,
    doc_emb: &EmbeddingMatrix,
    word_emb: Option<&EmbeddingMatrix>,
    sanitized: &[SanitizedDoc],
    config: &TopicModelConfig,
) -> Result<(TopicAssignment, Vec<Topic>), TopicError> {
    config.validate()?;
    let ids: Vec<String> = sanitized.iter().map(|d| d.record_id.clone()).collect();
    let points = doc_emb.select(&ids).map_err(TopicError::MissingEmbedding)?;

    let stage1 = reduce_and_cluster(reducer, &points, config, config.stage1_min_cluster)?;
    let mut assignment = TopicAssignment::default();
    let mut final_labels = vec![NOISE; ids.len()];

    match config.strategy {
        Strategy::OneStage => final_labels.clone_from(&stage1),
        Strategy::TwoStage => {
            let mut paths = vec![(NOISE, NOISE); ids.len()];
            for c in 0..n_clusters(&stage1) {
                let members: Vec<usize> = (0..ids.len()).filter(|&i| stage1[i] == c).collect();
                let member_ids: Vec<String> = members.iter().map(|&i| ids[i].clone()).collect();
                let sub = points.select(&member_ids).map_err(TopicError::MissingEmbedding)?;
                let mut sub_labels = reduce_and_cluster(reducer, &sub, config, config.stage2_min_cluster)?;
                if n_clusters(&sub_labels) == 0 {
                    if members.len() >= config.stage2_min_cluster {
                        log::info!("stage-1 cluster {c} did not split; keeping it whole");
                        sub_labels = vec![0; members.len()];
                    } else {
                        log::warn!("stage-1 cluster {c} is below the stage-2 minimum; dropping to noise");
                    }
                }
                for (&i, &s) in members.iter().zip(&sub_labels) {
                    paths[i] = (c, s);
                }
            }
            // Topic ids follow (stage-1 id, stage-2 id) order.
            let mut order: BTreeMap<(i64, i64), i64> = BTreeMap::new();
            for p in paths.iter().filter(|p| p.1 != NOISE) {
                order.insert(*p, 0);
            }
            for (next, id) in order.values_mut().enumerate() {
                *id = next as i64;
            }
            for (i, p) in paths.iter().enumerate() {
                final_labels[i] = order.get(p).copied().unwrap_or(NOISE);
                assignment.stage_path.insert(ids[i].clone(), *p);
            }
        }
    }
    for (id, l) in ids.iter().zip(&final_labels) {
        assignment.labels.insert(id.clone(), *l);
    }

    let k = n_clusters(&final_labels);
    let members: Vec<Vec<usize>> = (0..k)
        .map(|t| (0..ids.len()).filter(|&i| final_labels[i] == t).collect())
        .collect();
    let classes: Vec<Vec<&[String]>> = members
        .iter()
        .map(|m| m.iter().map(|&i| sanitized[i].tokens.as_slice()).collect())
        .collect();
    let weights = class_term_weights(&classes);

    let mut topics = Vec::with_capacity(k as usize);
    for (t, (m, w)) in members.iter().zip(&weights).enumerate() {
        let topic_id = t as i64;
        let centroid = centroid(&points, m);
        topics.push(Topic {
            topic_id,
            doc_ids: m.iter().map(|&i| ids[i].clone()).collect(),
            term_dist: term_distribution(w, topic_id)?,
            keywords: extract_keywords(w, &centroid, word_emb, config.top_k_keywords),
            centroid,
        });
    }
    Ok((assignment, topics))
}

fn centroid(points: &EmbeddingMatrix, members: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; points.dim()];
    for &i in members {
        for (a, x) in c.iter_mut().zip(points.row(i)) {
            *a += x;
        }
    }
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        c.iter_mut().for_each(|x| *x /= norm);
    } else {
        log::warn!("topic centroid is the zero vector");
    }
    c
}
