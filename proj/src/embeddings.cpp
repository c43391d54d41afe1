#include "textvqa/embeddings.hpp"

#include "textvqa/error.hpp"
#include "textvqa/text.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace textvqa {

OovMode parse_oov_mode(const std::string& s) {
    if (s == "hash_bucket") return OovMode::hash_bucket;
    if (s == "zero") return OovMode::zero;
    throw ValidationError("oov_mode", "expected hash_bucket or zero, got '" + s + "'");
}

std::string_view to_string(OovMode m) { return m == OovMode::hash_bucket ? "hash_bucket" : "zero"; }

Vocabulary::Vocabulary(std::vector<std::string> words, OovMode oov_mode, int num_hash_buckets)
    : words_(std::move(words)), oov_mode_(oov_mode), num_hash_buckets_(num_hash_buckets) {
    if (num_hash_buckets_ < 1) throw ValidationError("num_hash_buckets", "must be positive");
    for (std::size_t i = 0; i < words_.size(); ++i) {
        if (!index_.emplace(words_[i], static_cast<Index>(i)).second) {
            throw ValidationError("vocab", "duplicate word '" + words_[i] + "'");
        }
    }
}

Index Vocabulary::num_rows() const {
    return static_cast<Index>(words_.size()) + (oov_mode_ == OovMode::hash_bucket ? num_hash_buckets_ : 0);
}

bool Vocabulary::contains(std::string_view word) const {
    return index_.count(to_lower(word)) || index_.count(std::string(word));
}

Index Vocabulary::row(std::string_view word) const {
    const std::string lower = to_lower(word);
    if (auto it = index_.find(lower); it != index_.end()) return it->second;
    if (auto it = index_.find(std::string(word)); it != index_.end()) return it->second;
    if (oov_mode_ == OovMode::zero) return -1;
    return static_cast<Index>(words_.size()) +
           static_cast<Index>(stable_hash(lower) % static_cast<std::uint64_t>(num_hash_buckets_));
}

std::vector<Index> Vocabulary::rows(const std::vector<std::string>& words) const {
    std::vector<Index> out;
    out.reserve(words.size());
    for (const auto& w : words) out.push_back(row(w));
    return out;
}

Matrix embed_words(const std::vector<std::string>& words, const EmbeddingTable& table) {
    if (table.rows.rows() != table.vocab.num_rows() || table.rows.cols() != table.dim) {
        throw ShapeError("embedding table rows do not match its vocabulary");
    }
    Matrix out = Matrix::Zero(static_cast<Index>(words.size()), table.dim);
    for (std::size_t i = 0; i < words.size(); ++i) {
        const Index r = table.vocab.row(words[i]);
        if (r >= 0) out.row(static_cast<Index>(i)) = table.rows.row(r);
    }
    return out;
}

EmbeddingTable load_pretrained(const std::string& path, int expected_dim, PretrainedLoadStats* stats,
                               OovMode oov_mode, int num_hash_buckets) {
    if (expected_dim < 1) throw ValidationError("expected_dim", "must be positive");
    std::ifstream in(path);
    if (!in) throw IoError("cannot open vector file: " + path);

    std::vector<std::string> words;
    std::vector<std::vector<double>> vectors;
    std::unordered_map<std::string, std::size_t> seen;
    PretrainedLoadStats local;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        ++local.lines;
        std::istringstream fields(line);
        std::string word;
        if (!(fields >> word)) throw ValidationError("vectors", "empty line", lineno);
        std::vector<double> v;
        std::string tok;
        while (fields >> tok) {
            double x = 0.0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
            if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(x)) {
                throw ValidationError("vectors", "bad number '" + tok + "'", lineno);
            }
            v.push_back(x);
        }
        if (static_cast<int>(v.size()) != expected_dim) {
            throw ValidationError("vectors",
                                  "expected " + std::to_string(expected_dim) + " values, got " +
                                      std::to_string(v.size()),
                                  lineno);
        }
        if (auto it = seen.find(word); it != seen.end()) {
            vectors[it->second] = std::move(v);
            ++local.duplicates;
        } else {
            seen.emplace(word, words.size());
            words.push_back(word);
            vectors.push_back(std::move(v));
        }
    }

    EmbeddingTable t;
    t.dim = expected_dim;
    t.trainable = false;
    t.vocab = Vocabulary(words, oov_mode, num_hash_buckets);
    t.rows = Matrix::Zero(t.vocab.num_rows(), expected_dim);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (int j = 0; j < expected_dim; ++j) t.rows(static_cast<Index>(i), j) = vectors[i][static_cast<std::size_t>(j)];
    }
    if (stats) *stats = local;
    return t;
}

ContextualEncoder ContextualEncoder::create(ad::ParameterStore& store, const std::string& name, int input_dim,
                                            int output_dim, Rng& rng) {
    if (output_dim < 2 || output_dim % 2 != 0) throw ValidationError("ctx_dim", "must be a positive even number");
    return ContextualEncoder{BiLstmLayer::create(store, name, input_dim, output_dim / 2, rng)};
}

ad::Var ContextualEncoder::encode(ad::Tape& tape, const ad::Var& word_vectors) const {
    if (word_vectors.rows() == 0) throw ShapeError("contextual encoder: empty sequence");
    return layer.apply(tape, word_vectors);
}

Matrix contextual_encode(const Matrix& word_vectors, const ContextualEncoder& encoder) {
    if (word_vectors.rows() == 0) throw ShapeError("contextual encoder: empty sequence");
    ad::Tape tape;
    return encoder.encode(tape, tape.constant(word_vectors)).value();
}

std::vector<Matrix> contextual_encode_batch(const std::vector<Matrix>& sequences, const ContextualEncoder& encoder) {
    return bilstm_infer_batch(encoder.layer, sequences);
}

}  // namespace textvqa
