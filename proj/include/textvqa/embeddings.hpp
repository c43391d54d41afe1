#pragma once

// Word vectors with out-of-vocabulary handling, pretrained-vector loading, and
// the trainable bidirectional contextual encoder.

#include "textvqa/autodiff.hpp"
#include "textvqa/recurrent.hpp"

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace textvqa {

enum class OovMode { hash_bucket, zero };

OovMode parse_oov_mode(const std::string& s);
std::string_view to_string(OovMode m);

/// Word -> row map. With hash buckets, rows [size(), size() + buckets) are
/// reserved for OOV words, chosen by stable_hash(lowercased word) % buckets.
class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::vector<std::string> words, OovMode oov_mode, int num_hash_buckets);

    /// Lowercased lookup first, then the raw spelling; OOV falls back to the
    /// hash bucket row, or -1 (zero vector) in zero mode.
    Index row(std::string_view word) const;
    std::vector<Index> rows(const std::vector<std::string>& words) const;
    bool contains(std::string_view word) const;

    std::size_t size() const { return words_.size(); }
    Index num_rows() const;
    OovMode oov_mode() const { return oov_mode_; }
    int num_hash_buckets() const { return num_hash_buckets_; }
    const std::vector<std::string>& words() const { return words_; }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, Index> index_;
    OovMode oov_mode_ = OovMode::hash_bucket;
    int num_hash_buckets_ = 1;
};

struct EmbeddingTable {
    int dim = 0;
    Vocabulary vocab;
    Matrix rows;  // vocab.num_rows() x dim
    bool trainable = true;
};

/// len x dim matrix of looked-up rows.
Matrix embed_words(const std::vector<std::string>& words, const EmbeddingTable& table);

struct PretrainedLoadStats {
    std::size_t lines = 0;
    std::size_t duplicates = 0;
};

/// Reads "word v1 ... vd" lines. A duplicated word keeps its last vector and is
/// counted. Bad lines and dimension mismatches throw with the line number.
EmbeddingTable load_pretrained(const std::string& path, int expected_dim, PretrainedLoadStats* stats = nullptr,
                               OovMode oov_mode = OovMode::zero, int num_hash_buckets = 1);

/// Stand-in for a pretrained contextual model: one BiLSTM layer from word
/// vectors to output_dim (output_dim / 2 per direction).
struct ContextualEncoder {
    BiLstmLayer layer;

    static ContextualEncoder create(ad::ParameterStore& store, const std::string& name, int input_dim,
                                    int output_dim, Rng& rng);
    int output_dim() const { return layer.output_dim(); }

    ad::Var encode(ad::Tape& tape, const ad::Var& word_vectors) const;
};

/// len x output_dim. Throws on an empty sequence.
Matrix contextual_encode(const Matrix& word_vectors, const ContextualEncoder& encoder);

/// Encodes several sequences at once through the padded batch path.
std::vector<Matrix> contextual_encode_batch(const std::vector<Matrix>& sequences, const ContextualEncoder& encoder);

}  // namespace textvqa
