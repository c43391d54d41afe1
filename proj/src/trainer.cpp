#include "textvqa/trainer.hpp"

#include "textvqa/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace textvqa {

using json = nlohmann::ordered_json;

std::vector<PreparedSample> prepare_dataset(const TextVqaModel& model, const Dataset& d, const RetrievalIndex* index,
                                              int topk, bool exclude_self) {
    std::vector<PreparedSample> out;
    out.reserve(d.samples.size());
    for (const auto& s : d.samples) {
        std::vector<std::string> additional;
        if (index && topk > 0 && !model.config().dictionary_mode) {
            additional = index->retrieve(s.question, topk, exclude_self ? std::string_view(s.sample_id) : "");
        }
        out.push_back(model.prepare(s, additional));
    }
    return out;
}

std::vector<PredictionRecord> predict_prepared(const TextVqaModel& model, const std::vector<PreparedSample>& samples) {
    std::vector<PredictionRecord> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(model.predict(s));
    return out;
}

std::string EpochLog::to_json() const {
    json j;
    j["epoch"] = epoch;
    j["train_loss"] = train_loss;
    if (has_dev) j["dev_anls"] = dev_anls;
    j["unreachable"] = unreachable;
    return j.dump();
}

std::vector<QAPair> retrieval_corpus(const RunConfig& cfg, const Dataset& train) {
    if (!cfg.qa_corpus_path.empty()) return load_qa_corpus(cfg.qa_corpus_path);
    return qa_pairs_from_dataset(train);
}

Vocabulary build_vocabulary(const RunConfig& cfg, const Dataset& train, const std::vector<QAPair>& qa_pairs) {
    std::vector<std::string> extra;
    for (const auto& p : qa_pairs) extra.push_back(p.answer);
    return Vocabulary(collect_vocabulary(train, extra), cfg.model.oov_mode, cfg.model.hash_buckets);
}

namespace {

double global_grad_norm(const ad::ParameterStore& store) {
    double sq = 0.0;
    for (const auto& p : store) {
        if (p.trainable) sq += p.grad.squaredNorm();
    }
    return std::sqrt(sq);
}

double dataset_anls(const TextVqaModel& model, const std::vector<PreparedSample>& prepared, const Dataset& gold,
                    const MetricsConfig& metrics) {
    EvalOptions opts;
    opts.metrics = metrics;
    return evaluate(predict_prepared(model, prepared), gold, opts).anls;
}

}  // namespace

TrainResult train(const RunConfig& cfg, const Dataset& train_set, const Dataset* dev_set, const TrainOptions& opts) {
    cfg.validate();
    if (train_set.samples.empty()) throw ValidationError("train", "training split is empty");

    const std::vector<QAPair> qa = retrieval_corpus(cfg, train_set);
    std::optional<RetrievalIndex> index;
    if (cfg.retrieval_topk > 0 && !qa.empty()) index = RetrievalIndex::build(qa);

    std::optional<EmbeddingTable> pretrained;
    Vocabulary vocab;
    if (!cfg.pretrained_vectors.empty()) {
        pretrained = load_pretrained(cfg.pretrained_vectors, cfg.model.dims.word_dim, nullptr, cfg.model.oov_mode,
                                     cfg.model.hash_buckets);
        vocab = pretrained->vocab;
    } else {
        vocab = build_vocabulary(cfg, train_set, qa);
    }
    TextVqaModel model(cfg.model, vocab, cfg.seed);
    if (pretrained) model.set_pretrained(*pretrained);

    const RetrievalIndex* idx = index ? &*index : nullptr;
    const auto train_prep = prepare_dataset(model, train_set, idx, cfg.retrieval_topk, true);
    std::vector<PreparedSample> dev_prep;
    if (dev_set) dev_prep = prepare_dataset(model, *dev_set, idx, cfg.retrieval_topk, false);

    std::size_t unreachable = 0;
    for (const auto& s : train_prep) {
        if (!s.labels) throw ValidationError("answers", "training sample " + s.sample_id + " has no gold answers");
        if (!s.labels->reachable) ++unreachable;
    }

    Adamax optimizer(cfg.optimizer);
    Rng rng(cfg.seed ^ 0x7261696e5f6f7264ULL);
    std::vector<std::size_t> order(train_prep.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    auto keep = [&](int epoch) {
        return capture_checkpoint(model, cfg, &optimizer, static_cast<std::uint64_t>(epoch), rng.state(), qa);
    };
    result.last = keep(0);
    result.best = result.last;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const double inv = 1.0 / static_cast<double>(end - start);
            model.parameters().zero_grad();
            for (std::size_t k = start; k < end; ++k) {
                const PreparedSample& s = train_prep[order[k]];
                ad::Tape tape;
                const auto out = model.forward(tape, s, &rng);
                const double loss = out.loss.scalar();
                if (!std::isfinite(loss)) {
                    throw Error("divergence", "non-finite loss at epoch " + std::to_string(epoch) + " on sample " +
                                                  s.sample_id);
                }
                total += loss;
                tape.backward(ad::scale(out.loss, inv));
            }
            const double norm = global_grad_norm(model.parameters());
            if (!std::isfinite(norm)) {
                throw Error("divergence", "non-finite gradient at epoch " + std::to_string(epoch));
            }
            if (cfg.grad_clip > 0.0 && norm > cfg.grad_clip) {
                for (auto& p : model.parameters()) p.grad *= cfg.grad_clip / norm;
            }
            optimizer.step(model.parameters());
        }

        EpochLog log;
        log.epoch = epoch;
        log.train_loss = total / static_cast<double>(train_prep.size());
        log.unreachable = unreachable;
        if (dev_set && !dev_prep.empty()) {
            log.has_dev = true;
            log.dev_anls = dataset_anls(model, dev_prep, *dev_set, cfg.metrics);
        }
        result.epochs.push_back(log);
        if (opts.log) *opts.log << log.to_json() << "\n" << std::flush;

        const double score = log.has_dev ? log.dev_anls : 0.0;
        const bool better = log.has_dev ? score > result.best_dev_anls : true;
        if (better) {
            result.best_dev_anls = log.has_dev ? score : result.best_dev_anls;
            result.best_epoch = epoch;
            result.best = keep(epoch);
            if (!opts.checkpoint_path.empty()) write_checkpoint(result.best, opts.checkpoint_path);
        }
    }
    result.last = keep(cfg.epochs);
    if (cfg.epochs == 0 && !opts.checkpoint_path.empty()) write_checkpoint(result.best, opts.checkpoint_path);
    return result;
}

Predictor Predictor::from_checkpoint(const Checkpoint& ckpt, const RunConfig* override_cfg, bool force) {
    RunConfig cfg = override_cfg ? *override_cfg : checkpoint_config(ckpt);
    cfg.validate();
    TextVqaModel model = restore_model(ckpt, cfg, force);
    std::optional<RetrievalIndex> index;
    if (cfg.retrieval_topk > 0 && !ckpt.qa_pairs.empty()) index = RetrievalIndex::build(ckpt.qa_pairs);
    return Predictor{std::move(cfg), std::move(model), std::move(index)};
}

std::vector<PredictionRecord> Predictor::predict(const Dataset& d) const {
    const auto prepared = prepare_dataset(model, d, index ? &*index : nullptr, config.retrieval_topk, false);
    return predict_prepared(model, prepared);
}

// ---- gradient check --------------------------------------------------------

std::string GradcheckReport::summary() const {
    std::ostringstream os;
    os << (passed ? "PASS" : "FAIL") << " seed=" << seed << " max_rel_error=" << max_rel_error
       << " worst_tensor=" << worst_tensor << " tensors=" << tensors.size();
    return os.str();
}

std::string GradcheckReport::to_json() const {
    json j;
    j["seed"] = seed;
    j["passed"] = passed;
    j["tolerance"] = tolerance;
    j["max_rel_error"] = max_rel_error;
    j["worst_tensor"] = worst_tensor;
    json arr = json::array();
    for (const auto& t : tensors) {
        arr.push_back({{"name", t.name},
                       {"checked", t.checked},
                       {"max_rel_error", t.max_rel_error},
                       {"max_abs_error", t.max_abs_error}});
    }
    j["tensors"] = arr;
    return j.dump();
}

namespace {

double summed_loss(const TextVqaModel& model, const std::vector<PreparedSample>& samples) {
    double total = 0.0;
    for (const auto& s : samples) {
        ad::Tape tape;
        total += model.forward(tape, s).loss.scalar();
    }
    return total;
}

}  // namespace

GradcheckReport gradcheck(const RunConfig& cfg, std::uint64_t seed, const GradcheckOptions& opts) {
    cfg.validate();
    SyntheticConfig sc;
    sc.num_samples = static_cast<int>(std::max<std::size_t>(opts.num_samples, 1));
    sc.vocab_size = 12;
    sc.seed = seed;
    Dataset d = generate_synthetic(sc);
    // an OCR-free copy exercises the null candidate path
    Sample blank = d.samples.front();
    blank.sample_id += "-blank";
    blank.ocr_tokens.clear();
    d.samples.push_back(std::move(blank));

    const auto qa = qa_pairs_from_dataset(d);
    const RetrievalIndex index = RetrievalIndex::build(qa);
    TextVqaModel model(cfg.model, build_vocabulary(cfg, d, qa), seed);
    const auto prepared = prepare_dataset(model, d, &index, std::max(cfg.retrieval_topk, 1), true);

    auto& store = model.parameters();
    store.zero_grad();
    for (const auto& s : prepared) {
        ad::Tape tape;
        tape.backward(model.forward(tape, s).loss);
    }
    if (opts.corrupt) opts.corrupt(store);

    GradcheckReport report;
    report.seed = seed;
    report.tolerance = opts.tolerance;
    Rng pick(seed ^ 0x67726164636865ULL);
    for (auto& p : store) {
        if (!p.trainable) continue;
        TensorCheck tc;
        tc.name = p.name;
        const auto n = static_cast<std::size_t>(p.value.size());
        std::vector<std::size_t> entries(n);
        std::iota(entries.begin(), entries.end(), std::size_t{0});
        if (opts.max_entries > 0 && n > opts.max_entries) {
            pick.shuffle(entries);
            entries.resize(opts.max_entries);
            std::sort(entries.begin(), entries.end());
        }
        for (std::size_t e : entries) {
            double& v = p.value.data()[e];
            const double saved = v;
            v = saved + opts.step;
            const double up = summed_loss(model, prepared);
            v = saved - opts.step;
            const double down = summed_loss(model, prepared);
            v = saved;
            const double numeric = (up - down) / (2.0 * opts.step);
            const double analytic = p.grad.data()[e];
            const double abs_err = std::abs(analytic - numeric);
            const double rel = abs_err / std::max({std::abs(analytic), std::abs(numeric), opts.floor});
            tc.max_abs_error = std::max(tc.max_abs_error, abs_err);
            tc.max_rel_error = std::max(tc.max_rel_error, rel);
            ++tc.checked;
        }
        if (report.worst_tensor.empty() || tc.max_rel_error > report.max_rel_error) {
            report.max_rel_error = tc.max_rel_error;
            report.worst_tensor = tc.name;
        }
        report.tensors.push_back(std::move(tc));
    }
    report.passed = report.max_rel_error < opts.tolerance;
    return report;
}

}  // namespace textvqa
