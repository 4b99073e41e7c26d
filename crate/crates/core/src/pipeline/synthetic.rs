//! Seeded synthetic bibliographic corpus for demos and end-to-end tests.
//!
//! Five themes, each with its own vocabulary, stock phrases and author
//! pool. A handful of extra records exercise every screening stage.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{AuthorRef, BiblioRecord, SourceDb};

struct Theme {
    name: &'static str,
    crisis: &'static [&'static str],
    phrases: &'static [&'static str],
    words: &'static [&'static str],
}

const THEMES: [Theme; 5] = [
    Theme {
        name: "vaccination",
        crisis: &["COVID-19 pandemic", "pandemic"],
        phrases: &["vaccine hesitancy", "booster dose", "vaccination campaign"],
        words: &[
            "vaccine",
            "immunization",
            "antibody",
            "efficacy",
            "uptake",
            "mrna",
            "serology",
            "immunity",
            "rollout",
            "coverage",
            "trial",
            "adverse",
            "confidence",
            "cohort",
            "clinic",
            "dose",
            "injection",
            "variant",
            "hesitancy",
            "pharmacy",
        ],
    },
    Theme {
        name: "flooding",
        crisis: &["flood disaster", "disaster"],
        phrases: &["early warning", "storm surge", "river discharge"],
        words: &[
            "flood",
            "rainfall",
            "inundation",
            "levee",
            "drainage",
            "hydrological",
            "runoff",
            "catchment",
            "coastal",
            "evacuation",
            "forecast",
            "sediment",
            "embankment",
            "watershed",
            "monsoon",
            "dam",
            "floodplain",
            "precipitation",
            "gauge",
            "reservoir",
        ],
    },
    Theme {
        name: "mental health",
        crisis: &["pandemic", "COVID-19 crisis"],
        phrases: &["mental health", "psychological distress", "social isolation"],
        words: &[
            "anxiety",
            "depression",
            "loneliness",
            "wellbeing",
            "counselling",
            "symptom",
            "resilience",
            "trauma",
            "insomnia",
            "burnout",
            "adolescent",
            "distress",
            "coping",
            "therapy",
            "psychiatric",
            "mood",
            "questionnaire",
            "suicide",
            "sleep",
            "stigma",
        ],
    },
    Theme {
        name: "plastic waste",
        crisis: &["pandemic", "COVID-19"],
        phrases: &["plastic waste", "face mask", "medical waste"],
        words: &[
            "plastic",
            "packaging",
            "recycling",
            "disposal",
            "landfill",
            "polymer",
            "incineration",
            "municipal",
            "litter",
            "microplastic",
            "glove",
            "sanitizer",
            "leachate",
            "pollution",
            "shoreline",
            "debris",
            "collection",
            "circular",
            "biodegradable",
            "marine",
        ],
    },
    Theme {
        name: "earthquake relief",
        crisis: &["earthquake disaster", "humanitarian crisis"],
        phrases: &["humanitarian logistics", "temporary shelter", "search and rescue"],
        words: &[
            "earthquake",
            "seismic",
            "shelter",
            "relief",
            "logistics",
            "humanitarian",
            "rescue",
            "rubble",
            "reconstruction",
            "housing",
            "damage",
            "magnitude",
            "aftershock",
            "volunteer",
            "donation",
            "warehouse",
            "casualty",
            "triage",
            "fault",
            "retrofit",
        ],
    },
];

const GENERIC: [&str; 16] = [
    "impact",
    "response",
    "policy",
    "population",
    "community",
    "outcome",
    "risk",
    "region",
    "evidence",
    "framework",
    "intervention",
    "government",
    "capacity",
    "resource",
    "factor",
    "pattern",
];

const TEMPLATES: [&str; 6] = [
    "This paper examines {p} and {w} during the {c}.",
    "We analysed {w} and {w} across {n} {g} settings.",
    "Results show that {p} is associated with {w} and {g}.",
    "The {w} of {p} varied with {w} in the {c}.",
    "A {g} {w} model explains {w} and {p}.",
    "Findings highlight {w}, {w} and {g} for future {p} planning.",
];

const COUNTRIES: [&str; 10] = [
    "USA",
    "UK",
    "China",
    "Germany",
    "Brazil",
    "India",
    "Japan",
    "Australia",
    "Canada",
    "South Africa",
];

const SURNAMES: [&str; 30] = [
    "Smith", "Garcia", "Chen", "Muller", "Silva", "Patel", "Tanaka", "Brown", "Martin", "Nkosi", "Kim", "Rossi",
    "Novak", "Haddad", "Olsen", "Kowalski", "Dubois", "Singh", "Ivanova", "Lopez", "Ahmed", "Sato", "Wilson", "Costa",
    "Nguyen", "Fischer", "Moreau", "Larsen", "Petrov", "Okafor",
];

const GIVEN: [&str; 10] = ["A", "B", "C", "D", "E", "F", "G", "H", "J", "K"];

fn fill(template: &str, theme: &Theme, rng: &mut ChaCha8Rng) -> String {
    let mut out = String::new();
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let slot = &rest[start + 1..start + 2];
        rest = &rest[start + 3..];
        let word = match slot {
            "p" => theme.phrases.choose(rng).expect("non-empty").to_string(),
            "w" => theme.words.choose(rng).expect("non-empty").to_string(),
            "c" => theme.crisis.choose(rng).expect("non-empty").to_string(),
            "g" => GENERIC.choose(rng).expect("non-empty").to_string(),
            _ => rng.gen_range(3..40).to_string(),
        };
        out.push_str(&word);
    }
    out.push_str(rest);
    out
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

struct Person {
    author: AuthorRef,
}

fn author_pool(theme_idx: usize, rng: &mut ChaCha8Rng) -> Vec<Person> {
    (0..12)
        .map(|k| {
            let last = SURNAMES[(theme_idx * 7 + k * 3) % SURNAMES.len()];
            let first = GIVEN[(theme_idx + k) % GIVEN.len()];
            let country = COUNTRIES[(theme_idx * 2 + k % 3) % COUNTRIES.len()];
            let inst = format!("{} University of {}", ["North", "South", "Central"][k % 3], country);
            let _ = rng.gen::<u8>();
            Person {
                author: AuthorRef::new(last, first).with_affiliation(&inst, country),
            }
        })
        .collect()
}

fn themed_record(id: usize, theme_idx: usize, pools: &[Vec<Person>], rng: &mut ChaCha8Rng) -> BiblioRecord {
    let theme = &THEMES[theme_idx];
    let n_sentences = rng.gen_range(5..=8);
    let sentences: Vec<String> = (0..n_sentences)
        .map(|_| fill(TEMPLATES.choose(rng).expect("non-empty"), theme, rng))
        .collect();
    let title = capitalize(&format!(
        "{} and {} in the {}",
        theme.phrases.choose(rng).expect("non-empty"),
        theme.words.choose(rng).expect("non-empty"),
        theme.crisis.choose(rng).expect("non-empty")
    ));
    let mut r = BiblioRecord::new(
        format!("syn{id:04}"),
        title,
        sentences.join(" "),
        rng.gen_range(2019..=2023),
    );
    r.month = Some(rng.gen_range(1..=12));
    r.doi = Some(format!("10.5555/syn.{id:04}"));
    r.language = Some("en".into());
    r.source_db = [SourceDb::Scopus, SourceDb::Pubmed, SourceDb::Wos][id % 3];
    let n_authors = rng.gen_range(2..=4);
    let mut picked: Vec<usize> = (0..pools[theme_idx].len()).collect();
    picked.shuffle(rng);
    for &k in picked.iter().take(n_authors) {
        r.authors.push(pools[theme_idx][k].author.clone());
    }
    if rng.gen_bool(0.15) {
        let other = (theme_idx + 1) % THEMES.len();
        r.authors
            .push(pools[other][rng.gen_range(0..pools[other].len())].author.clone());
    }
    r
}

/// Builds `n` records: about 90% on-theme and the rest designed to be
/// screened out (duplicates, missing abstracts, off-topic, non-English,
/// retracted).
pub fn generate_corpus(n: usize, seed: u64) -> Vec<BiblioRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pools: Vec<Vec<Person>> = (0..THEMES.len()).map(|t| author_pool(t, &mut rng)).collect();
    let extras = n / 10;
    let themed = n - extras;
    let mut records: Vec<BiblioRecord> = (0..themed)
        .map(|i| themed_record(i, i % THEMES.len(), &pools, &mut rng))
        .collect();

    for e in 0..extras {
        let id = themed + e;
        let mut r = themed_record(id, e % THEMES.len(), &pools, &mut rng);
        match e % 5 {
            0 => {
                // Same DOI as an earlier record, different source.
                let original = &records[e * 7 % themed];
                r.doi.clone_from(&original.doi);
                r.title.clone_from(&original.title);
            }
            1 => r.abstract_text.clear(),
            2 => {
                r.title = "Soil nitrogen cycling in temperate grasslands".into();
                r.abstract_text = "We measured nitrogen mineralisation in grassland plots. Microbial biomass increased with soil moisture.".into();
            }
            3 => r.language = Some("de".into()),
            _ => r.retracted = true,
        }
        records.push(r);
    }
    records
}

/// Serializes records as RIS.
pub fn render_ris(records: &[BiblioRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str("TY  - JOUR\n");
        let _ = writeln!(out, "ID  - {}", r.record_id);
        let _ = writeln!(out, "DB  - {}", r.source_db.as_str());
        let title = if r.retracted {
            format!("RETRACTED: {}", r.title)
        } else {
            r.title.clone()
        };
        let _ = writeln!(out, "TI  - {title}");
        if !r.abstract_text.is_empty() {
            let _ = writeln!(out, "AB  - {}", r.abstract_text);
        }
        match r.month {
            Some(m) => {
                let _ = writeln!(out, "PY  - {}/{m:02}", r.year);
            }
            None => {
                let _ = writeln!(out, "PY  - {}", r.year);
            }
        }
        if let Some(doi) = &r.doi {
            let _ = writeln!(out, "DO  - {doi}");
        }
        if let Some(lang) = &r.language {
            let _ = writeln!(out, "LA  - {lang}");
        }
        for a in &r.authors {
            let _ = writeln!(out, "AU  - {}, {}", a.last_name, a.first_name);
            for af in &a.affiliations {
                let _ = writeln!(out, "AD  - {}, {}", af.institution, af.country);
            }
        }
        out.push_str("ER  - \n\n");
    }
    out
}

/// Theme labels in generation order, for tests that check recovery.
pub fn theme_names() -> Vec<&'static str> {
    THEMES.iter().map(|t| t.name).collect()
}
