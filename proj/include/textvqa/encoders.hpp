#pragma once

// Question understanding and OCR/object understanding.
//
// Question: h^{Q,0} = [g; b], three BiLSTM levels, self-attention on the top
// level, then condensation into u^Q.
//
// Context (OCR tokens or object words), for K BiLSTM levels:
//   1. word-level attention  w^_i = Attn(w_i^C, {w_j^Q}, {w_j^Q}) with w = [embedding; contextual]
//   2. h^{C,0} = [f; b; w^; POS(12) ; NER(8)], K BiLSTM levels
//   3. K+1 multilevel attentions  m^(k) = Attn(HoW_i^C, {HoW_j^Q}, {h_j^{Q,k}})
//      HoW^C = [f; b; h^{C,1..k-1}], HoW^Q = [g; b; h^{Q,1..k-1}]
//   4. self-attention over X = [f; b; h^{C,1..K}; m^(1..K+1)]
//   5. a final BiLSTM over [X; self-attended X] produces u (2 * hidden wide).
//
// Level widths are `hidden` (hidden / 2 per direction); the final layer uses
// `hidden` per direction.

#include "textvqa/attention.hpp"
#include "textvqa/corpus.hpp"
#include "textvqa/embeddings.hpp"
#include "textvqa/recurrent.hpp"
#include "textvqa/textprep.hpp"

#include <string>
#include <vector>

namespace textvqa {

struct EncoderDims {
    int word_dim = 64;
    int ctx_dim = 64;
    int hidden = 64;
    int question_layers = 3;
    int context_layers = 2;
    int attn_hidden = 64;
    static constexpr int pos_dim = 12;
    static constexpr int ner_dim = 8;

    void validate() const;
    int word_input_dim() const { return word_dim + ctx_dim; }
    int context_output_dim() const { return 2 * hidden; }
};

struct QuestionEncoderParams {
    std::vector<BiLstmLayer> layers;
    AttnLayer self_attn;
    ad::Parameter* pool = nullptr;  // hidden x 1

    static QuestionEncoderParams create(ad::ParameterStore& store, const std::string& name, const EncoderDims& dims,
                                        Rng& rng);
};

struct QuestionEncoding {
    ad::Var glove;                // g: q x word_dim
    ad::Var contextual;           // b: q x ctx_dim
    ad::Var words;                // w^Q = h^{Q,0} = [g; b]
    std::vector<ad::Var> levels;  // h^{Q,1..L}
    ad::Var attended;             // self-attended top level
    ad::Var condensed;            // u^Q: 1 x hidden
};

QuestionEncoding encode_question(ad::Tape& tape, const ad::Var& word_vectors, const ContextualEncoder& contextual,
                                 const QuestionEncoderParams& params);

struct ContextEncoderParams {
    AttnLayer word_attn;
    ad::Parameter* pos_table = nullptr;  // 12 x 12
    ad::Parameter* ner_table = nullptr;  // 8 x 8
    std::vector<BiLstmLayer> layers;
    std::vector<AttnLayer> multilevel;  // K + 1
    AttnLayer self_attn;
    BiLstmLayer final_layer;

    static ContextEncoderParams create(ad::ParameterStore& store, const std::string& name, const EncoderDims& dims,
                                       Rng& rng);
};

struct ContextEncoding {
    ad::Var fasttext;                 // f
    ad::Var contextual;               // b
    ad::Var words;                    // w^C = [f; b]
    ad::Var word_attended;            // w^
    ad::Var features;                 // POS ; NER embeddings
    std::vector<ad::Var> levels;      // h^{C,1..K}
    std::vector<ad::Var> multilevel;  // m^(1..K+1)
    ad::Var fused;                    // X
    ad::Var self_attended;
    ad::Var output;                   // u: m x 2*hidden
};

ContextEncoding encode_context(ad::Tape& tape, const ad::Var& word_vectors, const std::vector<TokenFeatureIds>& features,
                               const QuestionEncoding& question, const ContextualEncoder& contextual,
                               const ContextEncoderParams& params);

/// ŵ_i = Attn(w_i^C, {w_j^Q}, {w_j^Q}).
ad::Var word_level_attention(ad::Tape& tape, const ad::Var& context_words, const ad::Var& question_words,
                             const AttnLayer& layer);
Matrix word_level_attention(const Matrix& context_words, const Matrix& question_words, const AttnParams& params);

/// Each object becomes [attributes..., name] (each part tokenized); the
/// sequences are concatenated. `object_of_word[i]` is the object index of word i.
struct ObjectWords {
    std::vector<std::string> words;
    std::vector<std::size_t> object_of_word;
    std::size_t num_objects = 0;
};

ObjectWords render_object_words(const std::vector<SceneObject>& objects);

enum class Pooling { mean, sum };
Pooling parse_pooling(const std::string& s);
std::string_view to_string(Pooling p);

/// groups x positions matrix whose row g averages (or sums) the listed positions.
Matrix pooling_matrix(const std::vector<std::vector<std::size_t>>& groups, std::size_t positions,
                      Pooling mode = Pooling::mean);

/// u^D: one row per object, the mean of its word rows of `word_outputs`.
ad::Var pool_objects(ad::Tape& tape, const ad::Var& word_outputs, const ObjectWords& objects);

}  // namespace textvqa
