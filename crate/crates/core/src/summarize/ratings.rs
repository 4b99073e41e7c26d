//! Two-rater judgements of topic descriptions.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;

use serde::Serialize;

use super::SummarizeError;

/// Per-abstract yes/no verdicts of two raters for one topic description.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvaluationSheet {
    pub topic_id: i64,
    pub ratings: BTreeMap<String, (bool, bool)>,
}

impl EvaluationSheet {
    pub fn unanimous_yes(&self) -> usize {
        self.ratings.values().filter(|(a, b)| *a && *b).count()
    }
}

/// Share of abstracts both raters marked as aligned with the description.
pub fn comprehensiveness(sheet: &EvaluationSheet) -> Result<f64, SummarizeError> {
    if sheet.ratings.is_empty() {
        return Err(SummarizeError::EmptySheet(sheet.topic_id));
    }
    Ok(sheet.unanimous_yes() as f64 / sheet.ratings.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaResult {
    pub value: f64,
    /// Both raters used one and the same category for every item, so
    /// chance agreement is 1 and the statistic takes its conventional value.
    pub degenerate: bool,
}

/// Cohen's kappa for two raters over binary categories.
pub fn cohens_kappa(sheet: &EvaluationSheet) -> Result<KappaResult, SummarizeError> {
    let n = sheet.ratings.len();
    if n < 2 {
        return Err(SummarizeError::TooFewRatings {
            topic: sheet.topic_id,
            got: n,
        });
    }
    let agree = sheet.ratings.values().filter(|(a, b)| a == b).count();
    let yes1 = sheet.ratings.values().filter(|(a, _)| *a).count();
    let yes2 = sheet.ratings.values().filter(|(_, b)| *b).count();
    if (yes1 == n && yes2 == n) || (yes1 == 0 && yes2 == 0) {
        log::warn!("topic {}: degenerate rating marginals", sheet.topic_id);
        return Ok(KappaResult {
            value: if agree == n { 1.0 } else { 0.0 },
            degenerate: true,
        });
    }
    let nf = n as f64;
    let p_o = agree as f64 / nf;
    let (m1, m2) = (yes1 as f64 / nf, yes2 as f64 / nf);
    let p_e = m1 * m2 + (1.0 - m1) * (1.0 - m2);
    Ok(KappaResult {
        value: (p_o - p_e) / (1.0 - p_e),
        degenerate: false,
    })
}

fn parse_verdict(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "yes" | "y" => Some(true),
        "no" | "n" => Some(false),
        _ => None,
    }
}

/// Reads `topic_id,abstract_id,rater1,rater2` rows with yes/no verdicts.
pub fn read_ratings_csv<R: Read>(r: R) -> Result<BTreeMap<i64, EvaluationSheet>, SummarizeError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut sheets: BTreeMap<i64, EvaluationSheet> = BTreeMap::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let bad = |reason: String| SummarizeError::Ratings { line, reason };
        let row = row.map_err(|e| bad(e.to_string()))?;
        if row.len() < 4 {
            return Err(bad(format!("expected 4 fields, got {}", row.len())));
        }
        let topic: i64 = row[0].parse().map_err(|_| bad(format!("bad topic_id `{}`", &row[0])))?;
        let r1 = parse_verdict(&row[2]).ok_or_else(|| bad(format!("rater1 must be yes/no, got `{}`", &row[2])))?;
        let r2 = parse_verdict(&row[3]).ok_or_else(|| bad(format!("rater2 must be yes/no, got `{}`", &row[3])))?;
        let sheet = sheets.entry(topic).or_insert_with(|| EvaluationSheet {
            topic_id: topic,
            ratings: BTreeMap::new(),
        });
        if sheet.ratings.insert(row[1].to_string(), (r1, r2)).is_some() {
            return Err(bad(format!("abstract `{}` rated twice", &row[1])));
        }
    }
    Ok(sheets)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicEvaluation {
    pub topic_id: i64,
    pub docs: usize,
    pub aligned: usize,
    pub comprehensiveness: f64,
    pub kappa: Option<KappaResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelEvaluation {
    pub model_name: String,
    pub topics: Vec<TopicEvaluation>,
    pub mean_comprehensiveness: f64,
}

/// Scores every sheet of one model's descriptions.
pub fn evaluate_ratings(
    model_name: &str,
    sheets: &BTreeMap<i64, EvaluationSheet>,
) -> Result<ModelEvaluation, SummarizeError> {
    let mut topics = Vec::with_capacity(sheets.len());
    for sheet in sheets.values() {
        topics.push(TopicEvaluation {
            topic_id: sheet.topic_id,
            docs: sheet.ratings.len(),
            aligned: sheet.unanimous_yes(),
            comprehensiveness: comprehensiveness(sheet)?,
            kappa: cohens_kappa(sheet).ok(),
        });
    }
    if topics.is_empty() {
        return Err(SummarizeError::EmptySheet(-1));
    }
    let mean = topics.iter().map(|t| t.comprehensiveness).sum::<f64>() / topics.len() as f64;
    Ok(ModelEvaluation {
        model_name: model_name.to_string(),
        topics,
        mean_comprehensiveness: mean,
    })
}

/// Model with the highest mean comprehensiveness; the earlier one on a tie.
pub fn select_best_model(models: &[ModelEvaluation]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, m) in models.iter().enumerate() {
        if best.is_none_or(|b| m.mean_comprehensiveness > models[b].mean_comprehensiveness) {
            best = Some(i);
        }
    }
    best
}

/// Side-by-side table: one row per topic, three columns per model, and a
/// closing row of mean comprehensiveness.
pub fn render_rating_table(models: &[ModelEvaluation]) -> String {
    let mut out = format!("{:>6} {:>6}", "topic", "docs");
    for m in models {
        let _ = write!(out, " | {:>22}", m.model_name);
    }
    out.push('\n');
    let _ = write!(out, "{:>6} {:>6}", "", "");
    for _ in models {
        let _ = write!(out, " | {:>7} {:>7} {:>6}", "aligned", "compr.", "kappa");
    }
    out.push('\n');
    let topic_ids: std::collections::BTreeSet<i64> = models
        .iter()
        .flat_map(|m| m.topics.iter().map(|t| t.topic_id))
        .collect();
    for id in topic_ids {
        let docs = models
            .iter()
            .flat_map(|m| m.topics.iter())
            .find(|t| t.topic_id == id)
            .map_or(0, |t| t.docs);
        let _ = write!(out, "{id:>6} {docs:>6}");
        for m in models {
            match m.topics.iter().find(|t| t.topic_id == id) {
                Some(t) => {
                    let kappa = t.kappa.map_or("n/a".to_string(), |k| format!("{:.2}", k.value));
                    let _ = write!(out, " | {:>7} {:>7.2} {kappa:>6}", t.aligned, t.comprehensiveness);
                }
                None => {
                    let _ = write!(out, " | {:>22}", "-");
                }
            }
        }
        out.push('\n');
    }
    let _ = write!(out, "{:>13}", "mean");
    for m in models {
        let _ = write!(out, " | {:>7} {:>7.4} {:>6}", "", m.mean_comprehensiveness, "");
    }
    out.push('\n');
    out
}
