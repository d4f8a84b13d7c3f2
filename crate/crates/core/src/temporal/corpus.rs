use chrono::NaiveDate;

use super::{encode_mentions, parse_with, Lexicon};

/// A labeled expression list with the profile it was labeled against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub lexicon_version: String,
    pub dob: Option<NaiveDate>,
    pub reference: NaiveDate,
    pub cases: Vec<CorpusCase>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusCase {
    pub line: usize,
    pub expression: String,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusMiss {
    pub line: usize,
    pub expression: String,
    pub expected: String,
    pub actual: String,
}

impl Corpus {
    /// Reads `# key: value` headers (`lexicon-version`, `dob`, `reference`)
    /// and `expression <TAB> expected` lines.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut version = None;
        let mut dob = None;
        let mut reference = None;
        let mut cases = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((key, value)) = comment.split_once(':') {
                    let value = value.trim();
                    let date = || {
                        NaiveDate::parse_from_str(value, "%Y-%m-%d")
                            .map_err(|e| format!("line {}: {e}", i + 1))
                    };
                    match key.trim() {
                        "lexicon-version" => version = Some(value.to_owned()),
                        "dob" => dob = Some(date()?),
                        "reference" => reference = Some(date()?),
                        _ => {}
                    }
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (expression, expected) = line
                .split_once('\t')
                .ok_or_else(|| format!("line {}: expected a tab", i + 1))?;
            cases.push(CorpusCase {
                line: i + 1,
                expression: expression.to_owned(),
                expected: expected.trim().to_owned(),
            });
        }
        Ok(Corpus {
            lexicon_version: version.ok_or("missing lexicon-version header")?,
            dob,
            reference: reference.ok_or("missing reference header")?,
            cases,
        })
    }

    /// Cases whose extraction differs from the label.
    pub fn misses(&self, lexicon: &Lexicon) -> Vec<CorpusMiss> {
        self.cases
            .iter()
            .filter_map(|c| {
                let actual = encode_mentions(&parse_with(lexicon, &c.expression, self.dob, self.reference));
                (actual != c.expected).then(|| CorpusMiss {
                    line: c.line,
                    expression: c.expression.clone(),
                    expected: c.expected.clone(),
                    actual,
                })
            })
            .collect()
    }
}
