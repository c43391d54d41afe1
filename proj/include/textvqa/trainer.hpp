#pragma once

// Training loop, batch prediction and the finite-difference gradient check.

#include "textvqa/checkpoint.hpp"
#include "textvqa/config.hpp"
#include "textvqa/corpus.hpp"
#include "textvqa/metrics.hpp"
#include "textvqa/model.hpp"
#include "textvqa/prediction.hpp"
#include "textvqa/retrieval.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace textvqa {

/// Retrieval-backed preprocessing for a whole dataset. With `exclude_self`,
/// a sample never retrieves the QA pair built from itself.
std::vector<PreparedSample> prepare_dataset(const TextVqaModel& model, const Dataset& d, const RetrievalIndex* index,
                                              int topk, bool exclude_self);

std::vector<PredictionRecord> predict_prepared(const TextVqaModel& model, const std::vector<PreparedSample>& samples);

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    double dev_anls = 0.0;
    bool has_dev = false;
    std::size_t unreachable = 0;

    std::string to_json() const;
};

struct TrainOptions {
    /// Where the best-dev checkpoint is written (skipped when empty).
    std::string checkpoint_path;
    /// One JSON line per epoch (skipped when null).
    std::ostream* log = nullptr;
};

struct TrainResult {
    std::vector<EpochLog> epochs;
    int best_epoch = 0;
    double best_dev_anls = -1.0;
    Checkpoint best;  // best dev ANLS, or the last epoch without a dev split
    Checkpoint last;
};

/// QA pairs for retrieval: the configured corpus file, else the training split.
std::vector<QAPair> retrieval_corpus(const RunConfig& cfg, const Dataset& train);

/// Vocabulary over the training split and retrieval answers.
Vocabulary build_vocabulary(const RunConfig& cfg, const Dataset& train, const std::vector<QAPair>& qa_pairs);

TrainResult train(const RunConfig& cfg, const Dataset& train_set, const Dataset* dev_set, const TrainOptions& opts = {});

/// Everything needed to predict with a trained checkpoint.
struct Predictor {
    RunConfig config;
    TextVqaModel model;
    std::optional<RetrievalIndex> index;

    static Predictor from_checkpoint(const Checkpoint& ckpt, const RunConfig* override_cfg = nullptr,
                                     bool force = false);
    std::vector<PredictionRecord> predict(const Dataset& d) const;
};

// ---- gradient check --------------------------------------------------------

struct GradcheckOptions {
    double step = 1e-5;
    double tolerance = 1e-4;
    /// Denominator floor of the relative error: |a - n| / max(|a|, |n|, floor).
    double floor = 1e-4;
    /// Entries probed per tensor (all when the tensor is smaller); 0 probes all.
    std::size_t max_entries = 24;
    std::size_t num_samples = 4;
    /// Test hook: tampers with the analytic gradients before comparison.
    std::function<void(ad::ParameterStore&)> corrupt;
};

struct TensorCheck {
    std::string name;
    std::size_t checked = 0;
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
};

struct GradcheckReport {
    std::uint64_t seed = 0;
    std::vector<TensorCheck> tensors;
    double max_rel_error = 0.0;
    std::string worst_tensor;
    bool passed = false;
    double tolerance = 0.0;

    std::string summary() const;
    std::string to_json() const;
};

/// Central differences of the summed loss over a small synthetic batch,
/// against the tape's gradients, for every parameter tensor.
GradcheckReport gradcheck(const RunConfig& cfg, std::uint64_t seed, const GradcheckOptions& opts = {});

}  // namespace textvqa
