#pragma once

// The full question-answering network: embeddings, encoders, relational
// reasoning and answer heads, plus the per-sample preprocessing it consumes.

#include "textvqa/answer.hpp"
#include "textvqa/corpus.hpp"
#include "textvqa/embeddings.hpp"
#include "textvqa/encoders.hpp"
#include "textvqa/prediction.hpp"
#include "textvqa/relate.hpp"
#include "textvqa/textprep.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace textvqa {

struct ModelConfig {
    EncoderDims dims;
    int answer_dim = 64;
    RelationalMode relational_mode = RelationalMode::full;
    Pooling span_pooling = Pooling::sum;
    OovMode oov_mode = OovMode::hash_bucket;
    int hash_buckets = 32;
    /// Distinct question (GloVe role) and context (fastText role) tables.
    bool separate_tables = false;
    bool dictionary_mode = false;
    double dropout = 0.0;
    double embedding_init = 0.1;

    void validate() const;
};

/// Everything the network needs from one sample, resolved against a vocabulary.
struct PreparedSample {
    std::string sample_id;
    std::vector<std::string> question_words;
    std::vector<Index> question_rows;

    std::vector<ContextWord> context;
    std::vector<Index> context_rows;
    std::vector<TokenFeatureIds> context_features;
    Matrix context_positions;  // m x 8

    ObjectWords objects;
    std::vector<Index> object_rows;
    std::vector<TokenFeatureIds> object_features;
    Matrix object_positions;  // n x 8

    std::vector<std::string> additional_words;
    std::vector<Index> additional_rows;
    std::vector<TokenFeatureIds> additional_features;

    std::vector<AnswerCandidate> candidates;  // spans, additional, yes, no, unanswerable
    std::vector<std::vector<std::size_t>> span_groups;
    std::vector<std::vector<std::size_t>> additional_groups;
    std::size_t num_spans = 0;
    std::size_t num_additional = 0;

    std::optional<Labels> labels;  // present when the sample has gold answers
};

/// Lowercased words of every question, OCR token, object and dictionary entry,
/// plus `extra_texts`, sorted and deduplicated.
std::vector<std::string> collect_vocabulary(const Dataset& d, const std::vector<std::string>& extra_texts = {});

class TextVqaModel {
public:
    TextVqaModel(ModelConfig config, Vocabulary vocab, std::uint64_t seed);

    // Layers hold pointers into the parameter store, which survive a move but not a copy.
    TextVqaModel(const TextVqaModel&) = delete;
    TextVqaModel& operator=(const TextVqaModel&) = delete;
    TextVqaModel(TextVqaModel&&) = default;
    TextVqaModel& operator=(TextVqaModel&&) = default;

    /// Replaces the embedding rows with pretrained vectors (frozen). The table
    /// must share this model's vocabulary size and word dimension.
    void set_pretrained(const EmbeddingTable& table);

    PreparedSample prepare(const Sample& sample, const std::vector<std::string>& additional_texts = {}) const;

    struct Output {
        ad::Var p_ocr;  // invalid when there are no span candidates
        ad::Var p_add;  // invalid when there are no additional candidates
        SpecialHeads heads;
        ad::Var loss;  // invalid without labels
    };

    /// Records the forward pass on `tape`. `dropout_rng` enables dropout on the
    /// word embeddings when the configured rate is positive.
    Output forward(ad::Tape& tape, const PreparedSample& sample, Rng* dropout_rng = nullptr) const;

    Scores score(const PreparedSample& sample) const;
    PredictionRecord predict(const PreparedSample& sample) const;

    const ModelConfig& config() const { return config_; }
    const Vocabulary& vocab() const { return vocab_; }
    ad::ParameterStore& parameters() { return store_; }
    const ad::ParameterStore& parameters() const { return store_; }

private:
    ad::Var embed(ad::Tape& tape, ad::Parameter& table, const std::vector<Index>& rows, Rng* dropout_rng) const;

    ModelConfig config_;
    Vocabulary vocab_;
    ad::ParameterStore store_;
    ad::Parameter* question_table_ = nullptr;
    ad::Parameter* context_table_ = nullptr;
    ContextualEncoder contextual_;
    QuestionEncoderParams question_;
    ContextEncoderParams ocr_;
    ContextEncoderParams object_;
    RelateParams relate_;
    MatchParams match_;
};

Scores scores_from(const TextVqaModel::Output& out);
PredictionRecord make_prediction(const PreparedSample& sample, const Scores& scores);

}  // namespace textvqa
