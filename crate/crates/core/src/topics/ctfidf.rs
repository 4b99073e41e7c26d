//! Class-based TF-IDF: each topic's documents are concatenated into one
//! class document and terms are weighted against the average class length.

use std::collections::BTreeMap;

use super::TopicError;

/// Weight of every term present in each class:
/// `tf(t,c) * ln(1 + A / tf(t))`, with `A` the mean token count per class.
pub fn class_term_weights(classes: &[Vec<&[String]>]) -> Vec<BTreeMap<String, f64>> {
    let class_tf: Vec<BTreeMap<&str, usize>> = classes
        .iter()
        .map(|docs| {
            let mut tf = BTreeMap::new();
            for tok in docs.iter().flat_map(|d| d.iter()) {
                *tf.entry(tok.as_str()).or_insert(0) += 1;
            }
            tf
        })
        .collect();
    let mut total_tf: BTreeMap<&str, usize> = BTreeMap::new();
    for tf in &class_tf {
        for (t, c) in tf {
            *total_tf.entry(t).or_insert(0) += c;
        }
    }
    let tokens: usize = total_tf.values().sum();
    let avg = tokens as f64 / classes.len().max(1) as f64;

    class_tf
        .iter()
        .map(|tf| {
            tf.iter()
                .map(|(t, &c)| {
                    let idf = (1.0 + avg / total_tf[t] as f64).ln();
                    (t.to_string(), c as f64 * idf)
                })
                .collect()
        })
        .collect()
}

/// Normalizes class weights into a probability distribution.
pub fn term_distribution(weights: &BTreeMap<String, f64>, topic_id: i64) -> Result<BTreeMap<String, f64>, TopicError> {
    let total: f64 = weights.values().sum();
    if weights.is_empty() || total <= 0.0 {
        return Err(TopicError::EmptyVocabulary(topic_id));
    }
    Ok(weights.iter().map(|(t, w)| (t.clone(), w / total)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn hand_evaluated_weight() {
        // Class 0 has 10 tokens: 5x "flood" plus 5 fillers; class 1 has 10 fillers.
        let a = toks("flood flood flood flood flood a b c d e");
        let b = toks("f g h i j k l m n o");
        let w = class_term_weights(&[vec![a.as_slice()], vec![b.as_slice()]]);
        assert!((w[0]["flood"] - 5.0 * 3f64.ln()).abs() < 1e-12);
        assert!((w[0]["flood"] - 5.493).abs() < 1e-3);
        assert!(!w[1].contains_key("flood"));
    }

    #[test]
    fn distribution_sums_to_one() {
        let a = toks("x y y z z z");
        let b = toks("x q");
        let w = class_term_weights(&[vec![a.as_slice()], vec![b.as_slice()]]);
        for (i, c) in w.iter().enumerate() {
            let d = term_distribution(c, i as i64).unwrap();
            assert!((d.values().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(d.values().all(|p| *p >= 0.0));
        }
    }

    #[test]
    fn single_class_equal_total_counts_rank_by_tf() {
        let a = toks("p p p q q r");
        let w = class_term_weights(&[vec![a.as_slice()]]);
        assert!(w[0]["p"] > 0.0 && w[0]["q"] > 0.0);
        // In one class tf(t) = tf(t,c), so W grows with tf.
        assert!(w[0]["p"] > w[0]["q"] && w[0]["q"] > w[0]["r"]);
    }

    #[test]
    fn empty_class_is_an_error() {
        assert!(matches!(
            term_distribution(&BTreeMap::new(), 4),
            Err(TopicError::EmptyVocabulary(4))
        ));
    }
}
