use std::io::{Read, Write};

use serde::Serialize;

use super::{Keyword, Topic, TopicAssignment, TopicError};

#[derive(Serialize)]
struct TopicLine<'a> {
    topic_id: i64,
    size: usize,
    keywords: &'a [Keyword],
    doc_ids: &'a [String],
}

/// One topic summary per line.
pub fn write_topics_jsonl<W: Write>(topics: &[Topic], mut w: W) -> Result<(), TopicError> {
    for t in topics {
        let line = TopicLine {
            topic_id: t.topic_id,
            size: t.doc_ids.len(),
            keywords: &t.keywords,
            doc_ids: &t.doc_ids,
        };
        serde_json::to_writer(&mut w, &line).map_err(|e| TopicError::Format(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Full topic state, including term distributions and centroids.
pub fn write_topics_json<W: Write>(topics: &[Topic], mut w: W) -> Result<(), TopicError> {
    serde_json::to_writer_pretty(&mut w, topics).map_err(|e| TopicError::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_topics_json<R: Read>(r: R) -> Result<Vec<Topic>, TopicError> {
    serde_json::from_reader(r).map_err(|e| TopicError::Format(e.to_string()))
}

pub fn write_assignment_csv<W: Write>(assignment: &TopicAssignment, w: W) -> Result<(), TopicError> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    let fail = |e: csv::Error| TopicError::Format(e.to_string());
    out.write_record(["record_id", "topic_id"]).map_err(fail)?;
    for (id, label) in &assignment.labels {
        out.write_record([id.as_str(), &label.to_string()]).map_err(fail)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_assignment_csv<R: Read>(r: R) -> Result<TopicAssignment, TopicError> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut assignment = TopicAssignment::default();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| TopicError::Format(e.to_string()))?;
        let label = row
            .get(1)
            .and_then(|s| s.trim().parse::<i64>().ok())
            .ok_or_else(|| TopicError::Format(format!("row {}: bad topic_id", i + 2)))?;
        assignment.labels.insert(row[0].to_string(), label);
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Topic {
        Topic {
            topic_id: 0,
            doc_ids: vec!["a".into(), "b".into()],
            term_dist: [("virus".to_string(), 0.75), ("mask".to_string(), 0.25)]
                .into_iter()
                .collect(),
            keywords: vec![Keyword {
                token: "virus".into(),
                score: 0.9,
            }],
            centroid: vec![0.6, 0.8],
        }
    }

    #[test]
    fn jsonl_shape() {
        let mut out = Vec::new();
        write_topics_jsonl(&[sample()], &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "{\"topic_id\":0,\"size\":2,\"keywords\":[{\"token\":\"virus\",\"score\":0.9}],\"doc_ids\":[\"a\",\"b\"]}\n"
        );
    }

    #[test]
    fn full_json_round_trip() {
        let mut out = Vec::new();
        write_topics_json(&[sample()], &mut out).unwrap();
        assert_eq!(read_topics_json(out.as_slice()).unwrap(), vec![sample()]);
    }

    #[test]
    fn assignment_round_trip() {
        let mut a = TopicAssignment::default();
        a.labels.insert("r1".into(), 0);
        a.labels.insert("r2".into(), -1);
        let mut out = Vec::new();
        write_assignment_csv(&a, &mut out).unwrap();
        assert_eq!(std::str::from_utf8(&out).unwrap(), "record_id,topic_id\nr1,0\nr2,-1\n");
        assert_eq!(read_assignment_csv(out.as_slice()).unwrap(), a);
    }
}
