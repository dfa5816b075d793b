//! Seedable synthetic sample generation.
//!
//! A sample is drawn in the same order as the original generation script:
//! line of code, filler comment, label, and (for Useful samples) a template
//! comment that replaces the filler. In [`Balance::Exact`] mode the label is
//! taken from a pre-shuffled schedule instead of being drawn.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::dataset::{Dataset, Metadata, Record};
use crate::grammar::{
    is_keyword, validate_comment, validate_identifier, CodeLine, Comment, Identifier, Label,
    DATA_TYPES, KEYWORDS,
};
use crate::rng::{self, RNG_ALGORITHM};

pub const GENERATOR_VERSION: &str = concat!("commentlab-generator/", env!("CARGO_PKG_VERSION"));

const FIRST_CHARS: &[u8; 53] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_";
const TAIL_CHARS: &[u8; 63] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_";

/// Purpose and variable vocabularies of the Useful comment template.
#[derive(Debug, Clone, Copy, Default)]
pub struct UsefulTemplate;

impl UsefulTemplate {
    pub const PURPOSES: [&'static str; 7] = [
        "Declaration",
        "Initialization",
        "Calculation",
        "Function",
        "Definition",
        "Usage",
        "Explanation",
    ];
    pub const VARIABLES: [&'static str; 5] = ["Variable", "Value", "Data", "Result", "Parameter"];

    pub fn render(purpose: &str, variable: &str, line: &CodeLine) -> String {
        format!("// {purpose} of {variable} in the line of code:\n// {}", line.raw())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Balance {
    /// `ceil(count/2)` Useful and `floor(count/2)` Not Useful, shuffled.
    Exact,
    /// Each label drawn uniformly and independently.
    Bernoulli,
}

impl Balance {
    pub fn as_str(self) -> &'static str {
        match self {
            Balance::Exact => "exact",
            Balance::Bernoulli => "bernoulli",
        }
    }
}

impl std::str::FromStr for Balance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Balance::Exact),
            "bernoulli" => Ok(Balance::Bernoulli),
            other => Err(format!("unknown balance mode `{other}` (expected exact or bernoulli)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub count: usize,
    pub balance: Balance,
    /// Probability that a line carries an `= value` assignment.
    pub value_probability: f64,
    /// Identifiers get 0..=max_identifier_tail characters after the first.
    pub max_identifier_tail: usize,
    /// Draw line heads from the 32 distinct keywords instead of the 37-entry
    /// keyword + data type concatenation.
    pub dedupe_heads: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            count: 5000,
            balance: Balance::Exact,
            value_probability: 0.5,
            max_identifier_tail: 10,
            dedupe_heads: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("sample count must be at least 1")]
    ZeroCount,
    #[error("value probability {0} is outside [0, 1]")]
    ValueProbability(f64),
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        if self.count == 0 {
            return Err(GeneratorError::ZeroCount);
        }
        if !(0.0..=1.0).contains(&self.value_probability) {
            return Err(GeneratorError::ValueProbability(self.value_probability));
        }
        Ok(())
    }

    /// Key/value description written next to generated datasets.
    pub fn metadata(&self) -> Metadata {
        let mut meta = Metadata::default();
        meta.insert("generator_version", GENERATOR_VERSION);
        meta.insert("rng_algorithm", RNG_ALGORITHM);
        meta.insert("seed", self.seed.to_string());
        meta.insert("count", self.count.to_string());
        meta.insert("balance", self.balance.as_str());
        meta.insert("value_probability", self.value_probability.to_string());
        meta.insert("max_identifier_tail", self.max_identifier_tail.to_string());
        meta.insert("dedupe_heads", self.dedupe_heads.to_string());
        meta
    }
}

/// Line-head candidates in draw order. With duplicates, the five data types
/// are twice as likely as the other keywords.
pub fn head_candidates(dedupe: bool) -> Vec<&'static str> {
    let mut heads = KEYWORDS.to_vec();
    if !dedupe {
        heads.extend_from_slice(&DATA_TYPES);
    }
    heads
}

/// Random identifier; rerolled whenever the draw spells a keyword.
pub fn gen_identifier<R: Rng + ?Sized>(rng: &mut R, max_tail: usize) -> Identifier {
    loop {
        let tail = rng.gen_range(0..=max_tail);
        let mut s = String::with_capacity(tail + 1);
        s.push(FIRST_CHARS[rng.gen_range(0..FIRST_CHARS.len())] as char);
        for _ in 0..tail {
            s.push(TAIL_CHARS[rng.gen_range(0..TAIL_CHARS.len())] as char);
        }
        if is_keyword(&s) {
            continue;
        }
        return validate_identifier(&s).expect("generated identifier is well formed");
    }
}

pub fn gen_line<R: Rng + ?Sized>(rng: &mut R, cfg: &GeneratorConfig) -> CodeLine {
    let heads = head_candidates(cfg.dedupe_heads);
    let head = heads[rng.gen_range(0..heads.len())];
    let identifier = gen_identifier(rng, cfg.max_identifier_tail);
    let value = rng
        .gen_bool(cfg.value_probability)
        .then(|| rng.gen_range(0..=100u8));
    CodeLine::new(head, identifier, value).expect("generated line is well formed")
}

pub fn gen_useful_comment<R: Rng + ?Sized>(line: &CodeLine, rng: &mut R) -> Comment {
    let purpose = UsefulTemplate::PURPOSES.choose(rng).unwrap();
    let variable = UsefulTemplate::VARIABLES.choose(rng).unwrap();
    validate_comment(&UsefulTemplate::render(purpose, variable, line))
        .expect("template comment is well formed")
}

/// Filler comment of 1 to 5 random identifier words, as `// ...` or
/// `/* ... */`. Never empty, so it always satisfies the comment rules.
pub fn gen_not_useful_comment<R: Rng + ?Sized>(rng: &mut R, max_tail: usize) -> Comment {
    let words = rng.gen_range(1..=5);
    let body = (0..words)
        .map(|_| gen_identifier(rng, max_tail).to_string())
        .collect::<Vec<_>>()
        .join(" ");
    let text = if rng.gen_bool(0.5) {
        format!("// {body}")
    } else {
        format!("/* {body} */")
    };
    validate_comment(&text).expect("filler comment is well formed")
}

/// Generates `cfg.count` samples. The same config always yields the same
/// dataset.
pub fn gen_dataset(cfg: &GeneratorConfig) -> Result<Dataset, GeneratorError> {
    cfg.validate()?;
    let mut rng = rng::seeded(cfg.seed);

    let schedule: Option<Vec<Label>> = match cfg.balance {
        Balance::Exact => {
            let useful = cfg.count.div_ceil(2);
            let mut labels = vec![Label::Useful; useful];
            labels.resize(cfg.count, Label::NotUseful);
            labels.shuffle(&mut rng);
            Some(labels)
        }
        Balance::Bernoulli => None,
    };

    let mut records = Vec::with_capacity(cfg.count);
    for i in 0..cfg.count {
        let line = gen_line(&mut rng, cfg);
        let filler = gen_not_useful_comment(&mut rng, cfg.max_identifier_tail);
        let label = match &schedule {
            Some(labels) => labels[i],
            None => *Label::ALL.choose(&mut rng).unwrap(),
        };
        let comment = match label {
            Label::Useful => gen_useful_comment(&line, &mut rng),
            Label::NotUseful => filler,
        };
        records.push(Record {
            line: line.raw().to_string(),
            comment: comment.text().to_string(),
            label,
        });
    }

    let provenance = format!(
        "generated(seed={}, count={}, balance={})",
        cfg.seed,
        cfg.count,
        cfg.balance.as_str()
    );
    Ok(Dataset::new(records, provenance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{validate_line, validate_sample, CommentStyle};
    use regex::Regex;

    fn template_regex() -> Regex {
        Regex::new(
            r"^// (Declaration|Initialization|Calculation|Function|Definition|Usage|Explanation) of (Variable|Value|Data|Result|Parameter) in the line of code:\n// .+$",
        )
        .unwrap()
    }

    #[test]
    fn template_vocabulary() {
        assert_eq!(UsefulTemplate::PURPOSES.len(), 7);
        assert_eq!(UsefulTemplate::VARIABLES.len(), 5);
    }

    #[test]
    fn head_candidate_counts() {
        assert_eq!(head_candidates(false).len(), 37);
        assert_eq!(head_candidates(true).len(), 32);
    }

    #[test]
    fn identifiers_are_valid() {
        let mut rng = rng::seeded(1);
        for _ in 0..5000 {
            let id = gen_identifier(&mut rng, 10);
            assert!(validate_identifier(id.as_str()).is_ok());
            assert!((1..=11).contains(&id.as_str().len()));
        }
    }

    #[test]
    fn zero_tail_gives_single_character() {
        let mut rng = rng::seeded(5);
        for _ in 0..200 {
            assert_eq!(gen_identifier(&mut rng, 0).as_str().len(), 1);
        }
    }

    // Frozen from the first draws of the reference implementation.
    #[test]
    fn golden_first_draws() {
        let mut rng = rng::seeded(42);
        assert_eq!(gen_identifier(&mut rng, 10).as_str(), GOLDEN_IDENT_SEED_42);
        let mut rng = rng::seeded(7);
        assert_eq!(gen_line(&mut rng, &GeneratorConfig::default()).raw(), GOLDEN_LINE_SEED_7);
        let mut rng = rng::seeded(3);
        assert_eq!(gen_not_useful_comment(&mut rng, 10).text(), GOLDEN_COMMENT_SEED_3);
    }

    const GOLDEN_IDENT_SEED_42: &str = "YANsjtYW";
    const GOLDEN_LINE_SEED_7: &str = "long tf1w_my;";
    const GOLDEN_COMMENT_SEED_3: &str = "/* WYXstRJW */";

    #[test]
    fn lines_validate_and_values_are_bounded() {
        let cfg = GeneratorConfig::default();
        let mut rng = rng::seeded(11);
        let mut with_value = 0;
        for _ in 0..2000 {
            let line = gen_line(&mut rng, &cfg);
            assert_eq!(validate_line(line.raw()).unwrap(), line);
            if let Some(v) = line.value() {
                assert!(v <= 100);
                with_value += 1;
            }
        }
        assert!((800..1200).contains(&with_value), "{with_value}");
    }

    #[test]
    fn useful_comment_template() {
        let line = validate_line("int marks = 10;").unwrap();
        assert_eq!(
            UsefulTemplate::render("Declaration", "Variable", &line),
            "// Declaration of Variable in the line of code:\n// int marks = 10;"
        );
        let mut rng = rng::seeded(0);
        let mut pairs = std::collections::HashSet::new();
        let re = template_regex();
        for _ in 0..3000 {
            let c = gen_useful_comment(&line, &mut rng);
            assert_eq!(c.style(), CommentStyle::SingleLine);
            assert!(re.is_match(c.text()));
            let first = c.text().lines().next().unwrap().to_string();
            pairs.insert(first);
        }
        assert_eq!(pairs.len(), 35);
    }

    #[test]
    fn filler_never_matches_template() {
        let re = template_regex();
        let mut rng = rng::seeded(3);
        for _ in 0..10_000 {
            let c = gen_not_useful_comment(&mut rng, 10);
            assert!(validate_comment(c.text()).is_ok());
            assert!(!re.is_match(c.text()), "{}", c.text());
        }
    }

    #[test]
    fn exact_balance() {
        for count in [1, 2, 7, 5000] {
            let cfg = GeneratorConfig {
                count,
                seed: 42,
                ..Default::default()
            };
            let stats = gen_dataset(&cfg).unwrap().stats();
            assert_eq!(stats.useful, count.div_ceil(2));
            assert_eq!(stats.not_useful, count / 2);
        }
    }

    #[test]
    fn bernoulli_fraction_is_near_half() {
        let cfg = GeneratorConfig {
            count: 10_000,
            seed: 42,
            balance: Balance::Bernoulli,
            ..Default::default()
        };
        let f = gen_dataset(&cfg).unwrap().stats().useful_fraction.unwrap();
        assert!((0.47..=0.53).contains(&f), "{f}");
    }

    #[test]
    fn zero_count_rejected() {
        let cfg = GeneratorConfig {
            count: 0,
            ..Default::default()
        };
        assert_eq!(gen_dataset(&cfg).unwrap_err(), GeneratorError::ZeroCount);
    }

    #[test]
    fn deterministic_and_valid() {
        let cfg = GeneratorConfig {
            count: 500,
            seed: 99,
            ..Default::default()
        };
        let a = gen_dataset(&cfg).unwrap();
        let b = gen_dataset(&cfg).unwrap();
        assert_eq!(a, b);
        let re = template_regex();
        for r in a.records() {
            let s = validate_sample(&r.line, &r.comment, r.label.as_str()).unwrap();
            assert_eq!(re.is_match(s.comment.text()), r.label == Label::Useful);
        }
    }
}
