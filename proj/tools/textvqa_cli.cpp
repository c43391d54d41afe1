// textvqa command-line front end.

#include "textvqa/checkpoint.hpp"
#include "textvqa/config.hpp"
#include "textvqa/corpus.hpp"
#include "textvqa/error.hpp"
#include "textvqa/metrics.hpp"
#include "textvqa/prediction.hpp"
#include "textvqa/retrieval.hpp"
#include "textvqa/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using json = nlohmann::json;
using namespace textvqa;

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> relational_mode;
    std::optional<bool> dictionary_mode;
    std::optional<int> topk;
    std::vector<std::string> sets;

    void attach(CLI::App* cmd, bool with_config = true) {
        if (with_config) cmd->add_option("--config", config_path, "key = value configuration file");
        cmd->add_option("--seed", seed, "random seed");
        cmd->add_option("--relational-mode", relational_mode,
                        "full, semantic_only, positional_only, weighted_sum or none");
        cmd->add_option("--dictionary-mode", dictionary_mode, "answer from the per-sample dictionary (true/false)");
        cmd->add_option("--topk", topk, "retrieved additional answers per question (0 disables)");
        cmd->add_option("--set", sets, "extra key=value override, repeatable");
    }

    void apply(RunConfig& cfg) const {
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ValidationError("--set", "expected key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (seed) cfg.seed = *seed;
        if (relational_mode) cfg.set("relational_mode", *relational_mode);
        if (dictionary_mode) cfg.model.dictionary_mode = *dictionary_mode;
        if (topk) cfg.retrieval_topk = *topk;
        cfg.validate();
    }

    RunConfig build(RunConfig base) const {
        if (!config_path.empty()) base = load_config(config_path);
        apply(base);
        return base;
    }
};

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    return out;
}

int run_prepare(const std::string& data, const std::string& out, const std::string& split, bool lenient) {
    LoadReport report;
    LoadOptions opts;
    opts.strict = !lenient;
    const Dataset d = load_dataset(data, parse_split(split), &report, opts);
    if (!out.empty()) write_dataset(d, out);
    json j{{"lines", report.lines},
           {"loaded", report.loaded},
           {"rejected", report.rejected},
           {"warned", report.warned},
           {"clamped_coordinates", report.clamped_coordinates},
           {"messages", report.messages}};
    std::cout << j.dump() << "\n";
    return 0;
}

int run_synth(const std::string& out, std::uint64_t seed, int num_samples, int vocab_size) {
    const Dataset d = generate_synthetic({num_samples, vocab_size, seed});
    write_dataset(d, out);
    std::cout << json{{"samples", d.samples.size()}, {"seed", seed}, {"out", out}}.dump() << "\n";
    return 0;
}

int run_train(const Overrides& ov, const std::string& data, const std::string& dev, const std::string& out,
              const std::string& log_path) {
    RunConfig cfg = ov.build(desk_profile());
    const std::string train_path = data.empty() ? cfg.train_path : data;
    const std::string dev_path = dev.empty() ? cfg.dev_path : dev;
    if (train_path.empty()) throw ValidationError("--data", "no training split given");
    const Dataset train_set = load_dataset(train_path, Split::train);
    std::optional<Dataset> dev_set;
    if (!dev_path.empty()) dev_set = load_dataset(dev_path, Split::dev);

    std::ofstream log_file;
    TrainOptions opts;
    opts.checkpoint_path = out;
    if (!log_path.empty()) {
        log_file = open_out(log_path);
        opts.log = &log_file;
    } else {
        opts.log = &std::cout;
    }
    const TrainResult result = train(cfg, train_set, dev_set ? &*dev_set : nullptr, opts);
    std::cerr << json{{"best_epoch", result.best_epoch}, {"best_dev_anls", result.best_dev_anls}, {"checkpoint", out}}
                     .dump()
              << "\n";
    return 0;
}

int run_predict(const Overrides& ov, const std::string& checkpoint, const std::string& data, const std::string& out,
                bool force) {
    const Checkpoint ckpt = read_checkpoint(checkpoint);
    const RunConfig cfg = ov.build(checkpoint_config(ckpt));
    const Predictor predictor = Predictor::from_checkpoint(ckpt, &cfg, force);
    const Dataset d = load_dataset(data, Split::test);
    write_predictions(predictor.predict(d), out);
    return 0;
}

int run_eval(const std::string& predictions, const std::string& data, const std::string& out, bool per_sample,
             const std::string& delimiter, const std::string& format) {
    EvalOptions opts;
    if (!delimiter.empty()) opts.subset_delimiter = delimiter.front();
    const EvalReport report = evaluate_files(predictions, data, opts);
    const std::string text = format == "csv" ? report.to_csv() : report.to_json(per_sample) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        open_out(out) << text;
    }
    return 0;
}

int run_gradcheck(const Overrides& ov, std::size_t max_entries, std::size_t samples) {
    const RunConfig cfg = ov.build(toy_profile());
    GradcheckOptions opts;
    opts.max_entries = max_entries;
    opts.num_samples = samples;
    const GradcheckReport report = gradcheck(cfg, cfg.seed, opts);
    std::cout << report.to_json() << "\n";
    std::cerr << report.summary() << "\n";
    return report.passed ? 0 : 2;
}

int run_retrieve_build(const std::vector<std::string>& data, const std::string& out, const std::string& query,
                       int topk) {
    std::vector<QAPair> pairs;
    for (const auto& path : data) {
        const auto more = qa_pairs_from_dataset(load_dataset(path, Split::train));
        pairs.insert(pairs.end(), more.begin(), more.end());
    }
    const RetrievalIndex index = RetrievalIndex::build(pairs);
    if (!out.empty()) write_qa_corpus(index.pairs(), out);
    json j{{"documents", index.num_documents()}, {"average_length", index.average_length()}};
    if (!query.empty()) {
        json hits = json::array();
        for (const auto& h : index.search(query, topk)) hits.push_back({{"answer", h.answer}, {"score", h.score}});
        j["hits"] = hits;
    }
    std::cout << j.dump() << "\n";
    return 0;
}

void print_error(const std::string& kind, const std::string& message) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reading-and-reasoning text VQA: training, prediction and evaluation"};
    app.require_subcommand(1);

    std::string data, dev, out, checkpoint, split = "train", predictions, query, delimiter, format = "json";
    std::vector<std::string> data_files;
    bool lenient = false, force = false, per_sample = false;
    std::uint64_t synth_seed = 0;
    int num_samples = 200, vocab_size = 60, query_topk = RetrievalIndex::kDefaultTopK;
    std::size_t max_entries = 24, gc_samples = 4;
    std::string log_path;

    auto* prepare = app.add_subcommand("prepare", "validate a dataset and write it in canonical form");
    prepare->add_option("--data", data, "input JSONL dataset")->required();
    prepare->add_option("--out", out, "canonical JSONL output");
    prepare->add_option("--split", split, "train, dev or test")->check(CLI::IsMember({"train", "dev", "test"}));
    prepare->add_flag("--lenient", lenient, "reject bad records instead of stopping");

    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
    synth->add_option("--out", out, "output JSONL dataset")->required();
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--num-samples", num_samples, "number of samples");
    synth->add_option("--vocab-size", vocab_size, "size of the invented word list");

    Overrides train_ov, predict_ov, gc_ov;
    auto* train_cmd = app.add_subcommand("train", "train a model and write the best checkpoint");
    train_ov.attach(train_cmd);
    train_cmd->add_option("--data", data, "training split (overrides the config's train path)");
    train_cmd->add_option("--dev", dev, "dev split used for checkpoint selection");
    train_cmd->add_option("--out", out, "checkpoint path")->required();
    train_cmd->add_option("--log", log_path, "per-epoch JSON log (default stdout)");

    auto* predict = app.add_subcommand("predict", "predict answers with a checkpoint");
    predict_ov.attach(predict);
    predict->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
    predict->add_option("--data", data, "dataset to answer")->required();
    predict->add_option("--out", out, "predictions JSONL")->required();
    predict->add_flag("--force", force, "load despite a configuration hash mismatch");

    auto* eval = app.add_subcommand("eval", "score predictions against gold answers");
    eval->add_option("--predictions", predictions, "predictions JSONL")->required();
    eval->add_option("--data", data, "gold dataset")->required();
    eval->add_option("--out", out, "report path (default stdout)");
    eval->add_option("--subset-delimiter", delimiter, "group scores by sample_id prefix before this character");
    eval->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    eval->add_flag("--per-sample", per_sample, "include per-sample scores in the JSON report");

    auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient check at toy dims");
    gc_ov.attach(gc);
    gc->add_option("--max-entries", max_entries, "entries probed per tensor (0 = all)");
    gc->add_option("--samples", gc_samples, "synthetic samples in the loss");

    auto* rb = app.add_subcommand("retrieve-build", "build the question-answer retrieval corpus");
    rb->add_option("--data", data_files, "datasets contributing QA pairs")->required();
    rb->add_option("--out", out, "QA corpus JSONL");
    rb->add_option("--query", query, "optional question to look up");
    rb->add_option("--topk", query_topk, "answers returned for --query");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what());
        return 64;
    }

    try {
        if (*prepare) return run_prepare(data, out, split, lenient);
        if (*synth) return run_synth(out, synth_seed, num_samples, vocab_size);
        if (*train_cmd) return run_train(train_ov, data, dev, out, log_path);
        if (*predict) return run_predict(predict_ov, checkpoint, data, out, force);
        if (*eval) return run_eval(predictions, data, out, per_sample, delimiter, format);
        if (*gc) return run_gradcheck(gc_ov, max_entries, gc_samples);
        if (*rb) return run_retrieve_build(data_files, out, query, query_topk);
    } catch (const ValidationError& e) {
        std::cerr << json{{"error", e.kind()}, {"field", e.field()}, {"line", e.line()}, {"message", e.what()}}.dump()
                  << "\n";
        return 1;
    } catch (const Error& e) {
        print_error(e.kind(), e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return 1;
    }
    return 0;
}
