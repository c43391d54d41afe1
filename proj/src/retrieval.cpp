#include "textvqa/retrieval.hpp"

#include "textvqa/corpus.hpp"
#include "textvqa/error.hpp"
#include "textvqa/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_set>

namespace textvqa {

std::vector<std::string> retrieval_terms(std::string_view text) {
    std::vector<std::string> out;
    for (auto& tok : tokenize(to_lower(text))) {
        if (tok.size() == 1 && is_ascii_punct(tok[0])) continue;
        out.push_back(std::move(tok));
    }
    return out;
}

RetrievalIndex RetrievalIndex::build(std::vector<QAPair> pairs) {
    if (pairs.empty()) throw ValidationError("corpus", "retrieval corpus is empty");
    RetrievalIndex idx;
    idx.pairs_ = std::move(pairs);
    double total = 0.0;
    for (std::size_t d = 0; d < idx.pairs_.size(); ++d) {
        const auto terms = retrieval_terms(idx.pairs_[d].question);
        idx.doc_len_.push_back(terms.size());
        total += static_cast<double>(terms.size());
        std::map<std::string, std::size_t> tf;
        for (const auto& t : terms) ++tf[t];
        for (const auto& [term, f] : tf) idx.postings_[term].push_back({d, f});
    }
    idx.avg_len_ = total / static_cast<double>(idx.pairs_.size());
    return idx;
}

std::size_t RetrievalIndex::document_frequency(const std::string& term) const {
    auto it = postings_.find(to_lower(term));
    return it == postings_.end() ? 0 : it->second.size();
}

// Lucene-style idf, always positive.
double RetrievalIndex::idf(std::size_t df) const {
    const double n = static_cast<double>(pairs_.size());
    const double f = static_cast<double>(df);
    return std::log(1.0 + (n - f + 0.5) / (f + 0.5));
}

double RetrievalIndex::score(std::string_view query, std::size_t document) const {
    double s = 0.0;
    const double norm = avg_len_ > 0 ? static_cast<double>(doc_len_[document]) / avg_len_ : 0.0;
    for (const auto& term : retrieval_terms(query)) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        for (const auto& p : it->second) {
            if (p.document != document) continue;
            const double f = static_cast<double>(p.frequency);
            s += idf(it->second.size()) * f * (kK1 + 1.0) / (f + kK1 * (1.0 - kB + kB * norm));
        }
    }
    return s;
}

std::vector<RetrievalHit> RetrievalIndex::search(std::string_view query, int k, std::string_view exclude) const {
    if (k <= 0) throw ValidationError("topk", "must be positive");
    std::vector<double> scores(pairs_.size(), 0.0);
    for (const auto& term : retrieval_terms(query)) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double w = idf(it->second.size());
        for (const auto& p : it->second) {
            const double f = static_cast<double>(p.frequency);
            const double norm = static_cast<double>(doc_len_[p.document]) / avg_len_;
            scores[p.document] += w * f * (kK1 + 1.0) / (f + kK1 * (1.0 - kB + kB * norm));
        }
    }
    std::vector<std::size_t> docs;
    for (std::size_t d = 0; d < scores.size(); ++d) {
        if (scores[d] <= 0.0) continue;
        if (!exclude.empty() && pairs_[d].source_id == exclude) continue;
        docs.push_back(d);
    }
    std::stable_sort(docs.begin(), docs.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<RetrievalHit> out;
    std::unordered_set<std::string> seen;
    for (std::size_t d : docs) {
        if (static_cast<int>(out.size()) >= k) break;
        const std::string norm = normalize_answer(pairs_[d].answer);
        if (!seen.insert(norm).second) continue;
        out.push_back({pairs_[d].answer, scores[d], d});
    }
    return out;
}

std::vector<std::string> RetrievalIndex::retrieve(std::string_view query, int k, std::string_view exclude) const {
    std::vector<std::string> out;
    for (auto& h : search(query, k, exclude)) out.push_back(std::move(h.answer));
    return out;
}

std::vector<QAPair> load_qa_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open QA corpus: " + path);
    std::vector<QAPair> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (collapse_whitespace(line).empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError("", std::string("malformed JSON: ") + e.what(), lineno);
        }
        for (const char* key : {"question", "answer"}) {
            if (!rec.contains(key) || !rec[key].is_string() || rec[key].get<std::string>().empty()) {
                throw ValidationError(key, "expected a non-empty string", lineno);
            }
        }
        out.push_back({rec["question"].get<std::string>(), rec["answer"].get<std::string>(), {}});
    }
    return out;
}

void write_qa_corpus(const std::vector<QAPair>& pairs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write QA corpus: " + path);
    for (const auto& p : pairs) {
        nlohmann::ordered_json rec;
        rec["question"] = p.question;
        rec["answer"] = p.answer;
        out << rec.dump() << '\n';
    }
}

std::vector<QAPair> qa_pairs_from_dataset(const Dataset& d) {
    std::vector<QAPair> out;
    for (const auto& s : d.samples) {
        for (const auto& a : s.gold_answers) {
            if (collapse_whitespace(a).empty()) continue;
            out.push_back({s.question, a, s.sample_id});
        }
    }
    return out;
}

}  // namespace textvqa
