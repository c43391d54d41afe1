#pragma once

// Embedded BM25 index over (question, answer) pairs. Returns answer texts of the
// pairs whose stored question best matches a query question.

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace textvqa {

struct Dataset;

struct QAPair {
    std::string question;
    std::string answer;
    /// In-memory only: the sample a pair came from, so training can keep a
    /// sample from retrieving its own answer. Never serialized.
    std::string source_id;

    bool operator==(const QAPair& o) const { return question == o.question && answer == o.answer; }
};

struct RetrievalHit {
    std::string answer;
    double score = 0.0;
    std::size_t document = 0;
};

class RetrievalIndex {
public:
    static constexpr double kK1 = 1.2;
    static constexpr double kB = 0.75;
    static constexpr int kDefaultTopK = 10;

    /// Duplicate pairs stay distinct documents. Throws on an empty corpus.
    static RetrievalIndex build(std::vector<QAPair> pairs);

    /// Up to k answers, best first, deduplicated by normalized answer. Only
    /// positive scores are returned; ties keep insertion order. Documents whose
    /// source_id equals `exclude_source` are skipped.
    std::vector<std::string> retrieve(std::string_view query, int k = kDefaultTopK,
                                      std::string_view exclude_source = {}) const;
    std::vector<RetrievalHit> search(std::string_view query, int k = kDefaultTopK,
                                     std::string_view exclude_source = {}) const;

    /// BM25 score of one document for a query.
    double score(std::string_view query, std::size_t document) const;

    std::size_t num_documents() const { return pairs_.size(); }
    std::size_t document_frequency(const std::string& term) const;
    double average_length() const { return avg_len_; }
    const std::vector<QAPair>& pairs() const { return pairs_; }

private:
    struct Posting {
        std::size_t document;
        std::size_t frequency;
    };

    double idf(std::size_t df) const;

    std::vector<QAPair> pairs_;
    std::vector<std::size_t> doc_len_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    double avg_len_ = 0.0;
};

/// Lowercased word tokens with punctuation tokens removed.
std::vector<std::string> retrieval_terms(std::string_view text);

std::vector<QAPair> load_qa_corpus(const std::string& path);
void write_qa_corpus(const std::vector<QAPair>& pairs, const std::string& path);

/// One pair per (sample, gold answer).
std::vector<QAPair> qa_pairs_from_dataset(const Dataset& d);

}  // namespace textvqa
