//! Word lists shared across the toolkit: the causal-connective lexicon, the
//! closed classes used by the heuristic tagger, sentence-splitter
//! abbreviations, and the bundled given-name pools used for perturbation.

use std::collections::HashSet;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::LazyLock;

/// Connectives that mark the boundary between context and query clause.
///
/// Order matters only for display; membership checks go through the set.
pub const DEFAULT_CONNECTIVES: &[&str] = &[
    "because", "so", "but", "although", "though", "since", "while", "and", "until", "before",
    "after", "if",
];

/// Discourse connective lexicon. The default covers the common causal and
/// contrastive connectives; callers can swap in their own list (one term per
/// line) to widen or narrow what counts as a clause boundary.
#[derive(Debug, Clone)]
pub struct ConnectiveLexicon {
    terms: Vec<String>,
    set: HashSet<String>,
}

impl Default for ConnectiveLexicon {
    fn default() -> Self {
        Self::from_terms(DEFAULT_CONNECTIVES.iter().map(|s| s.to_string()))
    }
}

impl ConnectiveLexicon {
    pub fn from_terms(terms: impl IntoIterator<Item = String>) -> Self {
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        for term in terms {
            let term = term.trim().to_lowercase();
            if !term.is_empty() && seen.insert(term.clone()) {
                kept.push(term);
            }
        }
        Self {
            set: seen,
            terms: kept,
        }
    }

    /// Loads a lexicon from a plain-text file, one connective per line.
    /// Blank lines and `#` comments are skipped.
    pub fn load(path: &Path) -> std::io::Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut terms = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line?;
            let line = line.trim();
            if !line.is_empty() && !line.starts_with('#') {
                terms.push(line.to_string());
            }
        }
        Ok(Self::from_terms(terms))
    }

    pub fn contains(&self, norm: &str) -> bool {
        self.set.contains(norm)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }
}

/// Abbreviations that suppress a sentence split after their trailing period.
/// Matched against the lowercased final word of the candidate sentence,
/// period included.
pub const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "rev.", "gen.", "sen.", "rep.", "st.", "sr.", "jr.",
    "vs.", "etc.", "e.g.", "i.e.", "cf.", "fig.", "no.", "al.", "inc.", "ltd.", "co.", "corp.",
    "dept.", "est.", "approx.", "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.",
    "sept.", "oct.", "nov.", "dec.", "u.s.", "u.k.",
];

pub static ABBREVIATION_SET: LazyLock<HashSet<&'static str>> =
    LazyLock::new(|| ABBREVIATIONS.iter().copied().collect());

// --- Closed classes for the heuristic tagger -------------------------------

pub const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "some", "any", "no", "each", "every",
    "either", "neither", "another", "both",
];

/// Possessives that are determiners when they modify a following nominal and
/// pronouns otherwise ("his son" vs. "the son was his").
pub const POSSESSIVES: &[&str] = &["his", "her", "its", "their"];

pub const PRONOUNS: &[&str] = &[
    "i",
    "me",
    "my",
    "mine",
    "myself",
    "you",
    "your",
    "yours",
    "yourself",
    "he",
    "him",
    "his",
    "himself",
    "she",
    "her",
    "hers",
    "herself",
    "it",
    "its",
    "itself",
    "we",
    "us",
    "our",
    "ours",
    "ourselves",
    "they",
    "them",
    "their",
    "theirs",
    "themselves",
    "one",
    "who",
    "whom",
];

/// Third-person pronouns accepted as the referential slot of a candidate
/// sentence.
pub const THIRD_PERSON_PRONOUNS: &[&str] = &[
    "he",
    "him",
    "his",
    "himself",
    "she",
    "her",
    "hers",
    "herself",
    "it",
    "its",
    "itself",
    "they",
    "them",
    "their",
    "theirs",
    "themselves",
];

pub const MALE_PRONOUNS: &[&str] = &["he", "him", "his"];
pub const FEMALE_PRONOUNS: &[&str] = &["she", "her", "hers"];

/// Auxiliaries and modals, negated contractions included. Norms are compared
/// after apostrophe normalization, so only the straight-quote spelling is
/// listed.
pub const AUXILIARIES: &[&str] = &[
    "am",
    "is",
    "are",
    "was",
    "were",
    "be",
    "been",
    "being",
    "do",
    "does",
    "did",
    "have",
    "has",
    "had",
    "will",
    "would",
    "can",
    "could",
    "shall",
    "should",
    "may",
    "might",
    "must",
    "isn't",
    "aren't",
    "wasn't",
    "weren't",
    "don't",
    "doesn't",
    "didn't",
    "haven't",
    "hasn't",
    "hadn't",
    "won't",
    "wouldn't",
    "can't",
    "cannot",
    "couldn't",
    "shan't",
    "shouldn't",
    "mightn't",
    "mustn't",
    "ain't",
];

/// Modals and do-support forms: the next open-class token is a verb
/// ("couldn't lift", "don't panic"). Be/have forms are deliberately absent —
/// their complement is usually nominal or predicative.
pub const MODALS: &[&str] = &[
    "do",
    "does",
    "did",
    "don't",
    "doesn't",
    "didn't",
    "will",
    "won't",
    "would",
    "wouldn't",
    "can",
    "cannot",
    "can't",
    "could",
    "couldn't",
    "shall",
    "shan't",
    "should",
    "shouldn't",
    "may",
    "might",
    "mightn't",
    "must",
    "mustn't",
];

/// Frequent verbs, irregular past forms included, that the suffix rules
/// cannot catch ("broke", "went", "took"). Words whose nominal reading
/// dominates ("work", "call", "rose") are left out on purpose.
pub const COMMON_VERBS: &[&str] = &[
    "say",
    "says",
    "said",
    "go",
    "goes",
    "went",
    "gone",
    "get",
    "gets",
    "make",
    "makes",
    "made",
    "know",
    "knows",
    "knew",
    "known",
    "think",
    "thinks",
    "thought",
    "see",
    "sees",
    "saw",
    "seen",
    "come",
    "comes",
    "came",
    "take",
    "takes",
    "took",
    "taken",
    "give",
    "gives",
    "gave",
    "given",
    "find",
    "finds",
    "found",
    "tell",
    "tells",
    "told",
    "leave",
    "leaves",
    "left",
    "put",
    "puts",
    "mean",
    "means",
    "meant",
    "keep",
    "keeps",
    "kept",
    "let",
    "lets",
    "begin",
    "begins",
    "began",
    "begun",
    "show",
    "shows",
    "shown",
    "hear",
    "hears",
    "heard",
    "run",
    "runs",
    "ran",
    "hold",
    "holds",
    "held",
    "bring",
    "brings",
    "brought",
    "write",
    "writes",
    "wrote",
    "written",
    "sit",
    "sits",
    "sat",
    "stand",
    "stands",
    "stood",
    "lose",
    "loses",
    "lost",
    "pay",
    "pays",
    "paid",
    "meet",
    "meets",
    "met",
    "send",
    "sends",
    "sent",
    "build",
    "builds",
    "built",
    "fall",
    "falls",
    "fell",
    "fallen",
    "speak",
    "speaks",
    "spoke",
    "spoken",
    "read",
    "reads",
    "spend",
    "spends",
    "spent",
    "grow",
    "grows",
    "grew",
    "grown",
    "win",
    "wins",
    "won",
    "buy",
    "buys",
    "bought",
    "teach",
    "teaches",
    "taught",
    "catch",
    "catches",
    "caught",
    "drive",
    "drives",
    "drove",
    "driven",
    "eat",
    "eats",
    "ate",
    "eaten",
    "drink",
    "drinks",
    "drank",
    "throw",
    "throws",
    "threw",
    "thrown",
    "wear",
    "wears",
    "wore",
    "worn",
    "choose",
    "chooses",
    "chose",
    "chosen",
    "steal",
    "steals",
    "stole",
    "stolen",
    "wake",
    "wakes",
    "woke",
    "fly",
    "flies",
    "flew",
    "flown",
    "blow",
    "blows",
    "blew",
    "blown",
    "draw",
    "draws",
    "drew",
    "drawn",
    "sleep",
    "sleeps",
    "slept",
    "hit",
    "hits",
    "hurt",
    "hurts",
    "cut",
    "cuts",
    "shut",
    "shuts",
    "forget",
    "forgets",
    "forgot",
    "forgotten",
    "break",
    "breaks",
    "broke",
    "broken",
    "sell",
    "sells",
    "sold",
    "swim",
    "swims",
    "swam",
    "sing",
    "sings",
    "sang",
    "sung",
    "ring",
    "rings",
    "rang",
    "shake",
    "shakes",
    "shook",
    "shaken",
    "bite",
    "bites",
    "bit",
    "bitten",
    "hide",
    "hides",
    "hid",
    "hidden",
    "freeze",
    "freezes",
    "froze",
    "frozen",
    "lend",
    "lends",
    "lent",
    "bend",
    "bends",
    "bent",
    "lay",
    "lays",
    "laid",
    "try",
    "tries",
    "cry",
    "cries",
    "carry",
    "carries",
    "help",
    "helps",
    "ask",
    "asks",
    "stop",
    "stops",
    "start",
    "starts",
    "open",
    "opens",
    "close",
    "closes",
    "move",
    "moves",
    "turn",
    "turns",
    "pull",
    "pulls",
    "push",
    "pushes",
    "play",
    "plays",
    "live",
    "lives",
    "love",
    "loves",
    "hate",
    "hates",
    "need",
    "needs",
    "want",
    "wants",
    "lift",
    "lifts",
    "paint",
    "paints",
    "refuse",
    "refuses",
    "thank",
    "thanks",
    "blame",
    "blames",
    "punish",
    "punishes",
    "fit",
    "fits",
];

/// Linking verbs whose complement is read as predicative ("was so heavy").
pub const COPULAS: &[&str] = &[
    "am", "is", "are", "was", "were", "be", "been", "being", "isn't", "aren't", "wasn't",
    "weren't", "ain't", "seem", "seems", "seemed", "look", "looks", "looked", "feel", "feels",
    "felt", "get", "gets", "got", "getting", "become", "becomes", "became", "sound", "sounds",
    "sounded", "grow", "grows", "grew", "stay", "stays", "stayed", "remain", "remains", "remained",
];

/// Particles, adverbs, and prepositions: tokens that neither head a noun
/// phrase nor a verb chunk but may sit inside a verb chunk ("ended up
/// looking more like").
pub const PARTICLES_ADVERBS: &[&str] = &[
    // particles and directional adverbs
    "up",
    "out",
    "off",
    "down",
    "over",
    "back",
    "away",
    "in",
    "on",
    "to",
    // negation and degree
    "not",
    "never",
    "just",
    "still",
    "also",
    "very",
    "too",
    "quite",
    "really",
    "rather",
    "more",
    "most",
    "less",
    "least",
    "even",
    "only",
    "almost",
    "enough",
    "nearly",
    // time and place adverbs
    "then",
    "there",
    "here",
    "now",
    "again",
    "always",
    "often",
    "sometimes",
    "usually",
    "soon",
    "already",
    "yet",
    "today",
    "yesterday",
    "tomorrow",
    "ever",
    // wh-adverbs and hedges
    "when",
    "where",
    "why",
    "how",
    "perhaps",
    "maybe",
    "instead",
    "anyway",
    // prepositions
    "of",
    "at",
    "by",
    "for",
    "from",
    "with",
    "about",
    "into",
    "onto",
    "under",
    "between",
    "through",
    "during",
    "against",
    "without",
    "within",
    "upon",
    "across",
    "behind",
    "beyond",
    "near",
    "toward",
    "towards",
    "among",
    "along",
    "around",
    "despite",
    "except",
    "per",
    "via",
    "amid",
    "beneath",
    "beside",
    "besides",
    "past",
    "throughout",
    "underneath",
    "unlike",
    "till",
    "as",
    "like",
];

macro_rules! static_set {
    ($name:ident, $source:ident) => {
        pub static $name: LazyLock<HashSet<&'static str>> =
            LazyLock::new(|| $source.iter().copied().collect());
    };
}

static_set!(DETERMINER_SET, DETERMINERS);
static_set!(POSSESSIVE_SET, POSSESSIVES);
static_set!(PRONOUN_SET, PRONOUNS);
static_set!(THIRD_PERSON_SET, THIRD_PERSON_PRONOUNS);
static_set!(MALE_PRONOUN_SET, MALE_PRONOUNS);
static_set!(FEMALE_PRONOUN_SET, FEMALE_PRONOUNS);
static_set!(AUXILIARY_SET, AUXILIARIES);
static_set!(MODAL_SET, MODALS);
static_set!(COMMON_VERB_SET, COMMON_VERBS);
static_set!(COPULA_SET, COPULAS);
static_set!(PARTICLE_SET, PARTICLES_ADVERBS);

/// Given names used when rewriting candidate sentences. The bundled pools
/// are compiled in; callers can substitute their own files.
#[derive(Debug, Clone)]
pub struct NamePool {
    names: Vec<String>,
}

impl NamePool {
    pub fn from_names(names: impl IntoIterator<Item = String>) -> Self {
        let mut seen = HashSet::new();
        let names = names
            .into_iter()
            .map(|n| n.trim().to_string())
            .filter(|n| !n.is_empty() && seen.insert(n.clone()))
            .collect();
        Self { names }
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::from_names(text.lines().map(|l| l.to_string())))
    }

    pub fn bundled_male() -> Self {
        Self::from_names(
            include_str!("../data/names_male.txt")
                .lines()
                .map(|l| l.to_string()),
        )
    }

    pub fn bundled_female() -> Self {
        Self::from_names(
            include_str!("../data/names_female.txt")
                .lines()
                .map(|l| l.to_string()),
        )
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_connectives_match_the_published_list() {
        let lex = ConnectiveLexicon::default();
        for conn in [
            "because", "so", "but", "although", "though", "since", "while", "and", "until",
            "before", "after", "if",
        ] {
            assert!(lex.contains(conn), "missing {conn}");
        }
        assert_eq!(lex.terms().len(), 12);
        assert!(!lex.contains("therefore"));
    }

    #[test]
    fn custom_lexicon_dedupes_and_normalizes_case() {
        let lex =
            ConnectiveLexicon::from_terms(["Because", "because", "THEREFORE"].map(String::from));
        assert_eq!(
            lex.terms(),
            &["because".to_string(), "therefore".to_string()]
        );
    }

    #[test]
    fn bundled_name_pools_are_large_and_disjoint_enough() {
        let male = NamePool::bundled_male();
        let female = NamePool::bundled_female();
        assert!(male.len() >= 200, "male pool has {}", male.len());
        assert!(female.len() >= 200, "female pool has {}", female.len());
        // Draws must be able to produce two distinct names.
        assert!(male.len() >= 2 && female.len() >= 2);
    }
}
