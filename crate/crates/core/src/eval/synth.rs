//! Seeded synthetic experiment suite: template documents with proper-noun
//! and number heavy frames, human samples derived by light token noise, and
//! LLM samples derived by the deterministic mock paraphraser.
//!
//! The construction keeps retrieval honest (samples share most tokens with
//! their source document) while separating the two classes: human noise is
//! a one-character typo on a few tokens, whereas the paraphraser rewrites
//! every content word, a far larger lexical shift.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::regen::MockParaphraser;
use crate::retrieval::CorpusDoc;

use super::{EvalSample, GoldLabel};

/// How documents map to samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// Every document yields one human and one LLM sample (2N samples).
    Paired,
    /// Even documents yield human samples, odd ones LLM samples (N samples).
    Split,
}

/// Suite parameters. The defaults give 200 documents with 5% token noise on
/// the human side.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub docs: usize,
    pub noise_rate: f64,
    pub sentences_min: usize,
    pub sentences_max: usize,
    pub mode: SampleMode,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            docs: 200,
            noise_rate: 0.05,
            sentences_min: 8,
            sentences_max: 12,
            mode: SampleMode::Paired,
            seed: 17,
        }
    }
}

/// Sentence frames. Lowercase frame words are either stopwords of the mock
/// paraphraser or shorter than four characters, so only the {C} slots move
/// under paraphrasing.
const PATTERNS: [&str; 8] = [
    "{F1} {L1} met {F2} {L2} at the {C0} of {P0} on {D} {M0} {Y0}.",
    "The {C0} from {P0} to {P1} was led by {F1} {L1} during the {C1} of {Y0}.",
    "On {D} {M0} {Y0} the {C0} at {P0} was set out by {F1} {L1} and {F2} {L2}.",
    "{F1} {L1} of {P0} kept the {C0} and the {C1} at {P1} in {M0} {Y0}.",
    "By {Y0} the {C0} at {P0} was up to {N} under the eye of {F1} {L1}.",
    "{F1} {L1} and {F2} {L2} set out from {P0} with {N} {C0} in {M0} {Y0}.",
    "The {C0} between {P0} and {P1} ran from {M0} {Y0} to {M1} {Y1} over {N} {C1}.",
    "At {P0} on {D} {M0} {Y0}, {F1} {L1} put the {C0} before {F2} {L2}.",
];

const MONTHS: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September",
    "October", "November", "December",
];

/// Lowercase content-word pool for the {C} slots; four to six characters so
/// a single substitution moves a sentence's similarity into the band between
/// the machine and human thresholds.
const CONTENT_WORDS: [&str; 97] = [
    "grain", "timber", "copper", "wool", "cider", "slate", "barley", "hides", "amber", "chalk",
    "flint", "tallow", "linen", "pewter", "resin", "salt", "honey", "twine", "bricks", "casks",
    "ledger", "census", "treaty", "survey", "tariff", "ballot", "permit", "charter", "decree",
    "parish", "bridge", "harbor", "quarry", "granary", "mill", "forge", "wharf", "cellar",
    "stable", "archive", "market", "toll", "ferry", "canal", "dyke", "beacon", "signal",
    "muster", "patrol", "convoy", "relay", "billet", "ration", "bounty", "levy", "tithe",
    "brewery", "tannery", "bakery", "forum", "podium", "organ", "belfry", "spire", "vault",
    "crypt", "plinth", "gable", "lintel", "mortar", "gravel", "basalt", "marble", "timbre",
    "rhubarb", "clover", "sorrel", "barrow", "furrow", "meadow", "orchard", "paddock", "warren",
    "heath", "moor", "fen", "crag", "scree", "tarn", "knoll", "dell", "glen", "combe", "weir",
    "sluice", "culvert", "cistern",
];

const FIRST_SYL: [&str; 14] = [
    "Ar", "Bel", "Cor", "Dav", "Ed", "Fen", "Gil", "Hal", "Ing", "Jor", "Kel", "Lor", "Mar", "Os",
];
const FIRST_END: [&str; 10] = ["an", "en", "in", "on", "ric", "win", "mund", "bert", "ald", "ram"];
const LAST_SYL: [&str; 16] = [
    "Ash", "Breck", "Cald", "Dun", "Ell", "Farn", "Gray", "Holt", "Kirk", "Lang", "Mere", "Nor",
    "Ox", "Pen", "Rook", "Sel",
];
const LAST_END: [&str; 12] = [
    "well", "ford", "croft", "wick", "shaw", "thorne", "by", "stead", "field", "worth", "den",
    "leigh",
];
const PLACE_SYL: [&str; 14] = [
    "Ald", "Bram", "Carn", "Dray", "Ems", "Fol", "Gar", "Hex", "Ith", "Kes", "Lim", "Mord",
    "Nev", "Ulv",
];
const PLACE_END: [&str; 10] = [
    "holm", "port", "gate", "mere", "minster", "bourne", "haven", "march", "stow", "cliffe",
];

struct Pools {
    firsts: Vec<String>,
    lasts: Vec<String>,
    places: Vec<String>,
    content: Vec<String>,
}

fn build_pools(paraphraser: &MockParaphraser) -> Pools {
    let firsts = FIRST_SYL
        .iter()
        .flat_map(|a| FIRST_END.iter().map(move |b| format!("{a}{b}")))
        .collect();
    let lasts = LAST_SYL
        .iter()
        .flat_map(|a| LAST_END.iter().map(move |b| format!("{a}{b}")))
        .collect();
    let places = PLACE_SYL
        .iter()
        .flat_map(|a| PLACE_END.iter().map(move |b| format!("{a}{b}")))
        .collect();
    // Only keep content words the paraphraser actually rewrites, so no
    // sentence is accidentally a fixed point of the substitution.
    let content = CONTENT_WORDS
        .iter()
        .map(|w| w.to_string())
        .filter(|w| paraphraser.paraphrase(w) != *w)
        .collect();
    Pools {
        firsts,
        lasts,
        places,
        content,
    }
}

/// Draws from `pool` without replacement until exhausted, then reshuffles.
struct Drawer<'a> {
    pool: &'a [String],
    order: Vec<usize>,
    next: usize,
}

impl<'a> Drawer<'a> {
    fn new(pool: &'a [String], rng: &mut ChaCha8Rng) -> Self {
        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.shuffle(rng);
        Drawer {
            pool,
            order,
            next: 0,
        }
    }

    fn draw(&mut self, rng: &mut ChaCha8Rng) -> &'a str {
        if self.next >= self.order.len() {
            self.order.shuffle(rng);
            self.next = 0;
        }
        let idx = self.order[self.next];
        self.next += 1;
        &self.pool[idx]
    }
}

fn render_sentence(pattern: &str, rng: &mut ChaCha8Rng, pools: &Pools, drawers: &mut Drawers) -> String {
    let mut out = pattern.to_string();
    let replacements: [(&str, String); 14] = [
        ("{F1}", drawers.firsts.draw(rng).to_string()),
        ("{L1}", drawers.lasts.draw(rng).to_string()),
        ("{F2}", drawers.firsts.draw(rng).to_string()),
        ("{L2}", drawers.lasts.draw(rng).to_string()),
        ("{P0}", drawers.places.draw(rng).to_string()),
        ("{P1}", drawers.places.draw(rng).to_string()),
        ("{C0}", drawers.content.draw(rng).to_string()),
        ("{C1}", drawers.content.draw(rng).to_string()),
        ("{M0}", MONTHS[rng.gen_range(0..MONTHS.len())].to_string()),
        ("{M1}", MONTHS[rng.gen_range(0..MONTHS.len())].to_string()),
        ("{D}", rng.gen_range(2..=28).to_string()),
        ("{Y0}", rng.gen_range(1805..=1998).to_string()),
        ("{Y1}", rng.gen_range(1805..=1998).to_string()),
        ("{N}", rng.gen_range(12..=96).to_string()),
    ];
    for (slot, value) in replacements {
        out = out.replace(slot, &value);
    }
    debug_assert!(!pools.content.is_empty());
    out
}

struct Drawers<'a> {
    firsts: Drawer<'a>,
    lasts: Drawer<'a>,
    places: Drawer<'a>,
    content: Drawer<'a>,
}

/// Appends the token's final alphanumeric character once more, e.g.
/// `grain,` → `grainn,`. A small lexical wobble that keeps sentence
/// structure intact.
fn typo(token: &str) -> String {
    let core_end = match token.rfind(|c: char| c.is_alphanumeric()) {
        Some(i) => i + token[i..].chars().next().map(char::len_utf8).unwrap_or(1),
        None => return token.to_string(),
    };
    let repeat = token[..core_end]
        .chars()
        .next_back()
        .expect("core is non-empty");
    let mut out = String::with_capacity(token.len() + repeat.len_utf8());
    out.push_str(&token[..core_end]);
    out.push(repeat);
    out.push_str(&token[core_end..]);
    out
}

fn apply_noise(text: &str, rate: f64, rng: &mut ChaCha8Rng) -> String {
    let mut tokens: Vec<String> = text.split_whitespace().map(String::from).collect();
    let count = (tokens.len() as f64 * rate).round() as usize;
    let mut positions: Vec<usize> = (0..tokens.len()).collect();
    positions.shuffle(rng);
    for &pos in positions.iter().take(count) {
        tokens[pos] = typo(&tokens[pos]);
    }
    tokens.join(" ")
}

/// Builds the corpus and the evaluation dataset. Identical configs produce
/// byte-identical output.
pub fn generate_synthetic_suite(cfg: &SynthConfig) -> (Vec<CorpusDoc>, Vec<EvalSample>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let paraphraser = MockParaphraser::new(cfg.seed);
    let pools = build_pools(&paraphraser);

    let mut docs = Vec::with_capacity(cfg.docs);
    let mut samples = Vec::new();

    for doc_index in 0..cfg.docs {
        let mut drawers = Drawers {
            firsts: Drawer::new(&pools.firsts, &mut rng),
            lasts: Drawer::new(&pools.lasts, &mut rng),
            places: Drawer::new(&pools.places, &mut rng),
            content: Drawer::new(&pools.content, &mut rng),
        };
        let n_sentences = rng.gen_range(cfg.sentences_min..=cfg.sentences_max.max(cfg.sentences_min));
        let sentences: Vec<String> = (0..n_sentences)
            .map(|_| {
                let pattern = PATTERNS[rng.gen_range(0..PATTERNS.len())];
                render_sentence(pattern, &mut rng, &pools, &mut drawers)
            })
            .collect();
        let text = sentences.join(" ");
        let id = format!("doc-{doc_index:04}");
        let url = format!("corpus://{id}");

        let make_human = |rng: &mut ChaCha8Rng| EvalSample {
            id: format!("h-{doc_index:04}"),
            text: apply_noise(&text, cfg.noise_rate, rng),
            label: GoldLabel::Human,
            group: None,
        };
        let make_llm = || EvalSample {
            id: format!("m-{doc_index:04}"),
            text: paraphraser.paraphrase(&text),
            label: GoldLabel::Llm,
            group: Some("mock-paraphrase".into()),
        };

        match cfg.mode {
            SampleMode::Paired => {
                samples.push(make_human(&mut rng));
                samples.push(make_llm());
            }
            SampleMode::Split => {
                if doc_index % 2 == 0 {
                    samples.push(make_human(&mut rng));
                } else {
                    samples.push(make_llm());
                }
            }
        }

        docs.push(CorpusDoc { id, url, text });
    }

    (docs, samples)
}
