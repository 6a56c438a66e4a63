//! Text regeneration: prompt templates, the LLM provider interface, and the
//! deterministic mock paraphraser used for offline runs and tests.

use std::collections::HashSet;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::fnv1a64;

/// The rewrite instruction placed before the payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PromptVerb {
    Paraphrase,
    Revise,
    Polish,
}

impl PromptVerb {
    pub fn as_str(&self) -> &'static str {
        match self {
            PromptVerb::Paraphrase => "Paraphrase",
            PromptVerb::Revise => "Revise",
            PromptVerb::Polish => "Polish",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paraphrase" => Ok(PromptVerb::Paraphrase),
            "revise" => Ok(PromptVerb::Revise),
            "polish" => Ok(PromptVerb::Polish),
            other => Err(Error::Config(format!("unknown prompt verb: {other}"))),
        }
    }
}

/// Renders `"<verb> the following text: <payload>"`, sent as a single user
/// message with no system prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub verb: PromptVerb,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        PromptTemplate {
            verb: PromptVerb::Paraphrase,
        }
    }
}

impl PromptTemplate {
    pub fn render(&self, payload: &str) -> String {
        format!("{} the following text: {}", self.verb.as_str(), payload)
    }

    /// Recovers the payload from a rendered prompt. Mock providers use this
    /// to operate on the candidate text alone.
    pub fn extract_payload(prompt: &str) -> Option<&str> {
        for verb in [PromptVerb::Paraphrase, PromptVerb::Revise, PromptVerb::Polish] {
            let prefix = format!("{} the following text: ", verb.as_str());
            if let Some(rest) = prompt.strip_prefix(&prefix) {
                return Some(rest);
            }
        }
        None
    }
}

/// A text-completion backend. `complete` receives the fully rendered prompt.
pub trait LlmProvider: Send + Sync {
    fn complete(&self, prompt: &str, temperature: Option<f64>) -> Result<String>;

    /// Identifier recorded in regeneration records.
    fn model_id(&self) -> String;
}

/// One regeneration of a candidate text.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Regeneration {
    pub candidate_text: String,
    pub regenerated_text: String,
    pub model_id: String,
    pub temperature: Option<f64>,
}

/// Sends the rendered prompt to the provider with one retry on failure, then
/// strips surrounding whitespace and symmetric wrapping quotes (models often
/// quote their paraphrases, and alignment is whitespace-sensitive).
pub fn regenerate(
    candidate_text: &str,
    provider: &dyn LlmProvider,
    template: PromptTemplate,
    temperature: Option<f64>,
) -> Result<Regeneration> {
    if candidate_text.is_empty() {
        return Err(Error::EmptyInput);
    }
    let prompt = template.render(candidate_text);
    let raw = match provider.complete(&prompt, temperature) {
        Ok(text) => text,
        Err(_) => provider.complete(&prompt, temperature)?,
    };
    let cleaned = cleanup_completion(&raw);
    if cleaned.is_empty() {
        return Err(Error::EmptyCompletion);
    }
    Ok(Regeneration {
        candidate_text: candidate_text.to_string(),
        regenerated_text: cleaned,
        model_id: provider.model_id(),
        temperature,
    })
}

fn cleanup_completion(raw: &str) -> String {
    let mut text = raw.trim();
    const QUOTE_PAIRS: [(char, char); 4] =
        [('"', '"'), ('\'', '\''), ('\u{201C}', '\u{201D}'), ('\u{2018}', '\u{2019}')];
    loop {
        let mut stripped = false;
        for (open, close) in QUOTE_PAIRS {
            if text.len() >= 2 && text.starts_with(open) && text.ends_with(close) {
                text = text[open.len_utf8()..text.len() - close.len_utf8()].trim();
                stripped = true;
            }
        }
        if !stripped {
            break;
        }
    }
    text.to_string()
}

/// Chat-style HTTP provider: request `{model, messages, temperature}`,
/// response carries the completion at `choices[0].message.content`. The API
/// key comes from the `LLM_API_KEY` environment variable.
pub struct HttpLlm {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

/// Environment variable holding the LLM API key.
pub const LLM_API_KEY_VAR: &str = "LLM_API_KEY";

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    temperature: Option<f64>,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Deserialize)]
struct ChatResponseMessage {
    content: String,
}

impl HttpLlm {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        HttpLlm {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key: std::env::var(LLM_API_KEY_VAR).ok(),
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(120))
                .build()
                .expect("client construction cannot fail with static options"),
        }
    }
}

impl LlmProvider for HttpLlm {
    fn complete(&self, prompt: &str, temperature: Option<f64>) -> Result<String> {
        let body = ChatRequest {
            model: &self.model,
            messages: vec![ChatMessage {
                role: "user",
                content: prompt,
            }],
            temperature,
        };
        let mut request = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request
            .send()
            .map_err(|e| Error::ProviderUnavailable(format!("llm request: {e}")))?;
        if !response.status().is_success() {
            return Err(Error::ProviderUnavailable(format!(
                "llm endpoint returned {}",
                response.status()
            )));
        }
        let parsed: ChatResponse = response
            .json()
            .map_err(|e| Error::ProviderUnavailable(format!("llm response: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or(Error::EmptyCompletion)
    }

    fn model_id(&self) -> String {
        self.model.clone()
    }
}

/// Echoes the candidate text back unchanged. Useful in tests as the most
/// conservative regenerator.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityLlm;

impl LlmProvider for IdentityLlm {
    fn complete(&self, prompt: &str, _temperature: Option<f64>) -> Result<String> {
        Ok(PromptTemplate::extract_payload(prompt)
            .unwrap_or(prompt)
            .to_string())
    }

    fn model_id(&self) -> String {
        "identity".into()
    }
}

/// Common function-ish words the paraphraser leaves untouched.
const STOPWORDS: [&str; 48] = [
    "the", "and", "that", "this", "with", "from", "near", "over", "under", "into", "onto",
    "after", "before", "between", "about", "above", "below", "their", "there", "these", "those",
    "when", "where", "while", "which", "whose", "during", "through", "along", "upon", "within",
    "without", "toward", "towards", "been", "being", "were", "have", "has", "had", "also",
    "than", "then", "once", "both", "each", "some", "such",
];

/// Deterministic word-substitution paraphraser.
///
/// Every content word — all-lowercase, alphabetic, at least four characters,
/// not a stopword — is replaced with a fixed alias from a seeded synthetic
/// lexicon. Aliases are fixed points of the map, so applying it twice gives
/// the same text. Punctuation, capitalized tokens, digits, and short words
/// survive, which keeps sentence boundaries intact.
pub struct MockParaphraser {
    seed: u64,
    lexicon: Vec<String>,
    lexicon_set: HashSet<String>,
    stopwords: HashSet<&'static str>,
}

/// Size of the synthetic alias lexicon.
const LEXICON_SIZE: usize = 2048;

impl MockParaphraser {
    pub fn new(seed: u64) -> Self {
        let lexicon = build_lexicon(seed);
        let lexicon_set = lexicon.iter().cloned().collect();
        MockParaphraser {
            seed,
            lexicon,
            lexicon_set,
            stopwords: STOPWORDS.iter().copied().collect(),
        }
    }

    /// Applies the substitution to a whole text.
    pub fn paraphrase(&self, text: &str) -> String {
        text.split_whitespace()
            .map(|token| self.rewrite_token(token))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn rewrite_token(&self, token: &str) -> String {
        let core_start = token.find(|c: char| c.is_alphanumeric()).unwrap_or(token.len());
        let core_end = token
            .rfind(|c: char| c.is_alphanumeric())
            .map(|i| i + token[i..].chars().next().map(char::len_utf8).unwrap_or(1))
            .unwrap_or(core_start);
        let (lead, rest) = token.split_at(core_start);
        let (core, trail) = rest.split_at(core_end - core_start);
        if !self.is_content_word(core) {
            return token.to_string();
        }
        let alias = &self.lexicon[(fnv1a64(self.seed, core.as_bytes()) % LEXICON_SIZE as u64) as usize];
        format!("{lead}{alias}{trail}")
    }

    fn is_content_word(&self, core: &str) -> bool {
        core.chars().count() >= 4
            && core.chars().all(|c| c.is_alphabetic() && c.is_lowercase())
            && !self.stopwords.contains(core)
            && !self.lexicon_set.contains(core)
    }
}

/// Builds the synthetic alias lexicon from consonant-vowel syllables; all
/// entries are lowercase, at least four characters, and disjoint from the
/// stopword list by construction.
fn build_lexicon(seed: u64) -> Vec<String> {
    const ONSETS: [&str; 16] = [
        "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "kl",
    ];
    const VOWELS: [&str; 6] = ["a", "e", "i", "o", "u", "ei"];
    const CODAS: [&str; 8] = ["n", "r", "l", "s", "th", "x", "m", "k"];
    let mut lexicon = Vec::with_capacity(LEXICON_SIZE);
    let mut seen = HashSet::new();
    let mut counter = 0u64;
    while lexicon.len() < LEXICON_SIZE {
        let h = fnv1a64(seed ^ 0x6c65_7869, &counter.to_le_bytes());
        counter += 1;
        let o1 = ONSETS[(h % 16) as usize];
        let v1 = VOWELS[((h >> 8) % 6) as usize];
        let o2 = ONSETS[((h >> 16) % 16) as usize];
        let v2 = VOWELS[((h >> 24) % 6) as usize];
        let coda = CODAS[((h >> 32) % 8) as usize];
        let word = format!("{o1}{v1}{o2}{v2}{coda}");
        if word.chars().count() >= 4 && seen.insert(word.clone()) {
            lexicon.push(word);
        }
    }
    lexicon
}

impl LlmProvider for MockParaphraser {
    fn complete(&self, prompt: &str, _temperature: Option<f64>) -> Result<String> {
        let payload = PromptTemplate::extract_payload(prompt).unwrap_or(prompt);
        Ok(self.paraphrase(payload))
    }

    fn model_id(&self) -> String {
        format!("mock-paraphraser-{}", self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn paraphrase_prompt_is_byte_exact() {
        let template = PromptTemplate::default();
        let rendered = template.render("some candidate");
        assert_eq!(rendered, "Paraphrase the following text: some candidate");
        assert_eq!(
            rendered.as_bytes(),
            ["Paraphrase the following text: ", "some candidate"]
                .concat()
                .as_bytes()
        );
    }

    #[test]
    fn verb_variants_render() {
        let revise = PromptTemplate { verb: PromptVerb::Revise };
        assert_eq!(revise.render("x"), "Revise the following text: x");
        let polish = PromptTemplate { verb: PromptVerb::Polish };
        assert_eq!(polish.render("x"), "Polish the following text: x");
    }

    #[test]
    fn identity_provider_round_trips() {
        let r = regenerate("hello candidate text", &IdentityLlm, PromptTemplate::default(), None)
            .unwrap();
        assert_eq!(r.regenerated_text, "hello candidate text");
        assert_eq!(r.candidate_text, "hello candidate text");
    }

    #[test]
    fn empty_candidate_is_a_usage_error() {
        assert!(matches!(
            regenerate("", &IdentityLlm, PromptTemplate::default(), None),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn mock_paraphraser_is_idempotent() {
        let pi = MockParaphraser::new(7);
        let text = "The harvest signal reached Meridian Station before the storm of 1883.";
        let once = pi.paraphrase(text);
        let twice = pi.paraphrase(&once);
        assert_ne!(once, text, "content words should change");
        assert_eq!(once, twice, "substitution targets are fixed points");
    }

    #[test]
    fn mock_paraphraser_preserves_structure() {
        let pi = MockParaphraser::new(7);
        let text = "Captain Ruiz counted 47 barrels. The cargo shifted east!";
        let out = pi.paraphrase(text);
        assert_eq!(out.matches('.').count(), 1);
        assert_eq!(out.matches('!').count(), 1);
        assert!(out.contains("Captain Ruiz"), "capitalized tokens survive");
        assert!(out.contains("47"), "digits survive");
        assert!(!out.contains("barrels"), "content words are replaced: {out}");
    }

    #[test]
    fn mock_paraphraser_is_deterministic_per_word() {
        let pi = MockParaphraser::new(7);
        let a = pi.paraphrase("signal here and signal there");
        let words: Vec<&str> = a.split_whitespace().collect();
        assert_eq!(words[0], words[3], "same word maps to the same alias");
    }

    #[test]
    fn regenerating_paraphrased_text_returns_it_unchanged() {
        let pi = MockParaphraser::new(7);
        let original = "the harvest signal faded before the winter storms arrived.";
        let llm_like = pi.paraphrase(original);
        let r = regenerate(original, &pi, PromptTemplate::default(), None).unwrap();
        assert_eq!(r.regenerated_text, llm_like);
        let r2 = regenerate(&llm_like, &pi, PromptTemplate::default(), None).unwrap();
        assert_eq!(r2.regenerated_text, llm_like);
    }

    #[test]
    fn retry_recovers_from_one_transient_failure() {
        struct Flaky(AtomicUsize);
        impl LlmProvider for Flaky {
            fn complete(&self, _prompt: &str, _t: Option<f64>) -> Result<String> {
                if self.0.fetch_add(1, Ordering::SeqCst) == 0 {
                    Err(Error::ProviderUnavailable("transient".into()))
                } else {
                    Ok("recovered".into())
                }
            }
            fn model_id(&self) -> String {
                "flaky".into()
            }
        }
        let flaky = Flaky(AtomicUsize::new(0));
        let r = regenerate("payload", &flaky, PromptTemplate::default(), None).unwrap();
        assert_eq!(r.regenerated_text, "recovered");
        assert_eq!(flaky.0.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn persistent_failure_surfaces_after_retry() {
        struct Down;
        impl LlmProvider for Down {
            fn complete(&self, _prompt: &str, _t: Option<f64>) -> Result<String> {
                Err(Error::ProviderUnavailable("down".into()))
            }
            fn model_id(&self) -> String {
                "down".into()
            }
        }
        assert!(matches!(
            regenerate("payload", &Down, PromptTemplate::default(), None),
            Err(Error::ProviderUnavailable(_))
        ));
    }

    #[test]
    fn completion_cleanup_strips_wrapping_quotes() {
        struct Quoting;
        impl LlmProvider for Quoting {
            fn complete(&self, _prompt: &str, _t: Option<f64>) -> Result<String> {
                Ok("  \"a quoted answer\"  ".into())
            }
            fn model_id(&self) -> String {
                "quoting".into()
            }
        }
        let r = regenerate("payload", &Quoting, PromptTemplate::default(), None).unwrap();
        assert_eq!(r.regenerated_text, "a quoted answer");
    }

    #[test]
    fn empty_completion_is_an_error() {
        struct Silent;
        impl LlmProvider for Silent {
            fn complete(&self, _prompt: &str, _t: Option<f64>) -> Result<String> {
                Ok("  \"\" ".into())
            }
            fn model_id(&self) -> String {
                "silent".into()
            }
        }
        assert!(matches!(
            regenerate("payload", &Silent, PromptTemplate::default(), None),
            Err(Error::EmptyCompletion)
        ));
    }
}
