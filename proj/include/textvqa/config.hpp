#pragma once

// Run configuration: a flat `key = value` text file. Blank lines and lines
// starting with '#' are ignored; unknown keys are errors. See README for keys.

#include "textvqa/metrics.hpp"
#include "textvqa/model.hpp"
#include "textvqa/optimizer.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace textvqa {

struct RunConfig {
    ModelConfig model;
    AdamaxConfig optimizer;
    int batch_size = 16;
    int epochs = 30;
    std::uint64_t seed = 0;
    int retrieval_topk = 10;
    double grad_clip = 0.0;  // max global gradient norm; 0 disables
    MetricsConfig metrics;

    std::string train_path;
    std::string dev_path;
    std::string qa_corpus_path;
    std::string pretrained_vectors;

    /// Sets one key from its text value.
    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;
    void validate() const;

    /// Every key in canonical order, one `key = value` per line.
    std::string to_text() const;

    /// FNV-1a over the keys that shape the parameter tensors.
    std::uint64_t architecture_hash() const;

    static std::vector<std::string> keys();
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Default dims 64, K = 2, lr 2e-3, batch 16, 30 epochs.
RunConfig desk_profile();
/// Dims of 8 and a single context level, for gradient checks.
RunConfig toy_profile();

}  // namespace textvqa
