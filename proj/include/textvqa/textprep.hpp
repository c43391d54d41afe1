#pragma once

// Reading order, OCR context construction, positional features, coarse POS/NER
// tagging and answer-candidate generation.

#include "textvqa/corpus.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace textvqa {

struct ReadingOrder {
    /// Token indices in reading order (a permutation of 0..n-1).
    std::vector<std::size_t> order;
    /// Line index per position of `order`; non-decreasing.
    std::vector<std::size_t> line_ids;
};

/// Line clustering: tokens sorted by center-y join the current line while their
/// center-y is within 0.5 x median token height of the line's running mean;
/// lines go top to bottom, tokens within a line left to right, ties by index.
ReadingOrder compute_reading_order(const std::vector<OcrToken>& tokens, double image_width, double image_height);

/// Relative corner coordinates [x1/W, y1/H, ..., x4/W, y4/H], each clamped to [0, 1].
using PositionalFeature = std::array<double, 8>;

PositionalFeature positional_features(const Quad& quad, double image_width, double image_height);

struct ContextWord {
    std::string text;
    std::size_t token_index = 0;
    std::size_t line_id = 0;
    PositionalFeature position{};
};

/// Token texts in reading order, each carrying its positional feature.
std::vector<ContextWord> build_ocr_context(const std::vector<OcrToken>& tokens, const ReadingOrder& order,
                                           double image_width, double image_height);

constexpr int kNumPosTags = 12;
constexpr int kNumNerTags = 8;

enum class PosTag : int {
    noun = 0,
    verb,
    adjective,
    adverb,
    pronoun,
    determiner,
    preposition,
    conjunction,
    numeral,
    punctuation,
    symbol,
    other,
};

enum class NerTag : int {
    none = 0,
    number,
    capitalized,
    all_caps,
    date_like,
    money_like,
    unit_like,
    mixed_alnum,
};

struct TokenFeatureIds {
    int pos_id = static_cast<int>(PosTag::other);
    int ner_id = static_cast<int>(NerTag::none);

    bool operator==(const TokenFeatureIds&) const = default;
};

/// Rule-based coarse tagger driven by the word lists in resources/tagger_lexicon.txt.
/// `context` is accepted for interface stability; the current rules are word-local.
TokenFeatureIds pos_ner_ids(std::string_view word, const std::vector<std::string>& context = {});

enum class CandidateKind { ocr_span, additional, yes, no, unanswerable };

std::string_view to_string(CandidateKind k);

struct AnswerCandidate {
    CandidateKind kind = CandidateKind::ocr_span;
    /// Original OCR token indices (ocr_span only; empty in dictionary mode).
    std::vector<std::size_t> token_indices;
    /// Positions in the encoded context that this candidate pools over.
    std::vector<std::size_t> context_positions;
    std::string text;
    PositionalFeature positional{};
    /// A two-token span whose tokens sit on different lines.
    bool crosses_line = false;
};

/// Spans of one token, then two reading-order-consecutive tokens, then one
/// candidate per distinct normalized additional text (special answers are
/// skipped there), then yes, no, unanswerable.
std::vector<AnswerCandidate> generate_candidates(const Sample& sample, const ReadingOrder& order,
                                                 const std::vector<std::string>& additional_texts);

/// Task-1 mode: one candidate per dictionary entry with zero positional
/// features, followed by the three special candidates. Throws when the sample
/// has no dictionary.
std::vector<AnswerCandidate> dictionary_mode_candidates(const Sample& sample);

/// The context words for dictionary mode: every entry tokenized and
/// concatenated; positions are zero.
std::vector<ContextWord> dictionary_context(const Sample& sample);

bool is_special_answer(std::string_view normalized);

}  // namespace textvqa
