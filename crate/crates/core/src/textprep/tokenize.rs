/// Lowercases and splits on anything that is not alphanumeric, keeping
/// hyphens that sit between alphanumerics ("covid-19", "state-of-the-art").
/// Tokens shorter than two characters are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let flush = |current: &mut String, tokens: &mut Vec<String>| {
        let t = current.trim_matches('-');
        if t.chars().count() >= 2 {
            tokens.push(t.to_string());
        }
        current.clear();
    };
    for c in text.chars() {
        if c.is_alphanumeric() || c == '-' {
            current.extend(c.to_lowercase());
        } else {
            flush(&mut current, &mut tokens);
        }
    }
    flush(&mut current, &mut tokens);
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_internal_hyphens() {
        assert_eq!(tokenize("COVID-19 pandemic!"), ["covid-19", "pandemic"]);
        assert_eq!(tokenize("state-of-the-art"), ["state-of-the-art"]);
        assert_eq!(tokenize("-lead trail- --"), ["lead", "trail"]);
    }

    #[test]
    fn drops_single_characters() {
        assert!(tokenize("a b c").is_empty());
        assert_eq!(tokenize("ab cd e"), ["ab", "cd"]);
    }

    #[test]
    fn splits_on_underscore_and_punctuation() {
        assert_eq!(tokenize("plastic_waste, (heat)"), ["plastic", "waste", "heat"]);
    }
}
