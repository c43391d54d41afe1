#pragma once

// ST-VQA / TextVQA evaluation: Levenshtein distance, ANLS and VQA accuracy.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace textvqa {

struct Dataset;
struct PredictionRecord;

struct MetricsConfig {
    double tau = 0.5;
    bool lowercase = true;
    bool strip_punct = false;

    void validate() const;
};

/// Unit-cost edit distance over Unicode code points.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// levenshtein(a, b) / max(|a|, |b|); 0 when both are empty.
double normalized_levenshtein(std::string_view a, std::string_view b);

/// Applies the metric-side normalization: optional lowercasing, optional ASCII
/// punctuation stripping, then whitespace collapsing.
std::string metric_normalize(std::string_view s, const MetricsConfig& cfg);

/// Per-question ANLS: max over gold answers of (1 - NL) when NL < tau, else 0.
double anls_score(std::string_view prediction, const std::vector<std::string>& gold, const MetricsConfig& cfg = {});

/// Per-question VQA accuracy: min(#humans whose answer matches / 3, 1).
double vqa_accuracy_score(std::string_view prediction, const std::vector<std::string>& humans,
                          const MetricsConfig& cfg = {});

using PredictionMap = std::map<std::string, std::string>;
using GoldMap = std::map<std::string, std::vector<std::string>>;

/// Mean per-question ANLS over every gold question. Questions without a
/// prediction are scored against the empty string and counted in `missing`.
double anls(const PredictionMap& predictions, const GoldMap& gold, const MetricsConfig& cfg = {},
            std::size_t* missing = nullptr);

double vqa_accuracy(const PredictionMap& predictions, const GoldMap& gold, const MetricsConfig& cfg = {},
                    std::size_t* missing = nullptr);

struct SampleScore {
    std::string sample_id;
    std::string prediction;
    double anls = 0.0;
    double accuracy = 0.0;
};

struct SubsetScore {
    std::size_t count = 0;
    double anls = 0.0;
    double accuracy = 0.0;
};

struct EvalReport {
    double anls = 0.0;
    double vqa_accuracy = 0.0;
    std::size_t num_questions = 0;
    std::size_t missing_predictions = 0;
    std::size_t extra_predictions = 0;
    std::vector<SampleScore> per_sample;
    /// Keyed by the sample_id prefix before the subset delimiter (empty when disabled).
    std::map<std::string, SubsetScore> subsets;

    /// JSON text with a fixed key order.
    std::string to_json(bool include_samples = true) const;
    std::string to_csv() const;
};

struct EvalOptions {
    MetricsConfig metrics;
    /// When non-zero, samples are also aggregated by the sample_id prefix before
    /// the first occurrence of this character.
    char subset_delimiter = '\0';
};

EvalReport evaluate(const PredictionMap& predictions, const GoldMap& gold, const EvalOptions& opts = {});
EvalReport evaluate(const std::vector<PredictionRecord>& predictions, const Dataset& gold,
                    const EvalOptions& opts = {});
/// Reads a prediction JSONL file and a gold dataset file.
EvalReport evaluate_files(const std::string& prediction_path, const std::string& gold_path,
                          const EvalOptions& opts = {});

GoldMap gold_map(const Dataset& dataset);

}  // namespace textvqa
