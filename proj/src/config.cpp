#include "textvqa/config.hpp"

#include "textvqa/error.hpp"
#include "textvqa/text.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace textvqa {

namespace {

int to_int(const std::string& key, const std::string& v) {
    int out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ValidationError(key, "expected an integer, got '" + v + "'");
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ValidationError(key, "expected a non-negative integer, got '" + v + "'");
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ValidationError(key, "expected a number, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ValidationError(key, "expected true or false, got '" + v + "'");
}

std::string fmt(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return {buf, ptr};
}

std::string fmt(bool v) { return v ? "true" : "false"; }

const std::vector<std::string> kKeys = {
    "word_dim",      "ctx_dim",        "hidden",       "question_layers", "context_layers", "attn_hidden",
    "answer_dim",    "relational_mode", "span_pooling", "oov_mode",    "hash_buckets",    "separate_tables", "dictionary_mode",
    "dropout",       "embedding_init", "lr",           "beta1",           "beta2",          "eps",
    "weight_decay",  "batch_size",     "epochs",       "seed",            "retrieval_topk", "grad_clip",
    "anls_tau",      "lowercase",      "strip_punct",  "train",           "dev",            "qa_corpus",
    "pretrained_vectors",
};

const std::vector<std::string> kArchitectureKeys = {
    "word_dim",   "ctx_dim",  "hidden",       "question_layers", "context_layers",
    "attn_hidden", "answer_dim", "oov_mode", "hash_buckets",    "separate_tables",
};

}  // namespace

std::vector<std::string> RunConfig::keys() { return kKeys; }

void RunConfig::set(const std::string& key, const std::string& value) {
    auto& d = model.dims;
    if (key == "word_dim") d.word_dim = to_int(key, value);
    else if (key == "ctx_dim") d.ctx_dim = to_int(key, value);
    else if (key == "hidden") d.hidden = to_int(key, value);
    else if (key == "question_layers") d.question_layers = to_int(key, value);
    else if (key == "context_layers") d.context_layers = to_int(key, value);
    else if (key == "attn_hidden") d.attn_hidden = to_int(key, value);
    else if (key == "answer_dim") model.answer_dim = to_int(key, value);
    else if (key == "relational_mode") model.relational_mode = parse_relational_mode(value);
    else if (key == "span_pooling") model.span_pooling = parse_pooling(value);
    else if (key == "oov_mode") model.oov_mode = parse_oov_mode(value);
    else if (key == "hash_buckets") model.hash_buckets = to_int(key, value);
    else if (key == "separate_tables") model.separate_tables = to_bool(key, value);
    else if (key == "dictionary_mode") model.dictionary_mode = to_bool(key, value);
    else if (key == "dropout") model.dropout = to_double(key, value);
    else if (key == "embedding_init") model.embedding_init = to_double(key, value);
    else if (key == "lr") optimizer.lr = to_double(key, value);
    else if (key == "beta1") optimizer.beta1 = to_double(key, value);
    else if (key == "beta2") optimizer.beta2 = to_double(key, value);
    else if (key == "eps") optimizer.eps = to_double(key, value);
    else if (key == "weight_decay") optimizer.weight_decay = to_double(key, value);
    else if (key == "batch_size") batch_size = to_int(key, value);
    else if (key == "epochs") epochs = to_int(key, value);
    else if (key == "seed") seed = to_u64(key, value);
    else if (key == "retrieval_topk") retrieval_topk = to_int(key, value);
    else if (key == "grad_clip") grad_clip = to_double(key, value);
    else if (key == "anls_tau") metrics.tau = to_double(key, value);
    else if (key == "lowercase") metrics.lowercase = to_bool(key, value);
    else if (key == "strip_punct") metrics.strip_punct = to_bool(key, value);
    else if (key == "train") train_path = value;
    else if (key == "dev") dev_path = value;
    else if (key == "qa_corpus") qa_corpus_path = value;
    else if (key == "pretrained_vectors") pretrained_vectors = value;
    else throw ValidationError(key, "unknown configuration key");
}

std::string RunConfig::get(const std::string& key) const {
    const auto& d = model.dims;
    if (key == "word_dim") return std::to_string(d.word_dim);
    if (key == "ctx_dim") return std::to_string(d.ctx_dim);
    if (key == "hidden") return std::to_string(d.hidden);
    if (key == "question_layers") return std::to_string(d.question_layers);
    if (key == "context_layers") return std::to_string(d.context_layers);
    if (key == "attn_hidden") return std::to_string(d.attn_hidden);
    if (key == "answer_dim") return std::to_string(model.answer_dim);
    if (key == "relational_mode") return std::string(to_string(model.relational_mode));
    if (key == "span_pooling") return std::string(to_string(model.span_pooling));
    if (key == "oov_mode") return std::string(to_string(model.oov_mode));
    if (key == "hash_buckets") return std::to_string(model.hash_buckets);
    if (key == "separate_tables") return fmt(model.separate_tables);
    if (key == "dictionary_mode") return fmt(model.dictionary_mode);
    if (key == "dropout") return fmt(model.dropout);
    if (key == "embedding_init") return fmt(model.embedding_init);
    if (key == "lr") return fmt(optimizer.lr);
    if (key == "beta1") return fmt(optimizer.beta1);
    if (key == "beta2") return fmt(optimizer.beta2);
    if (key == "eps") return fmt(optimizer.eps);
    if (key == "weight_decay") return fmt(optimizer.weight_decay);
    if (key == "batch_size") return std::to_string(batch_size);
    if (key == "epochs") return std::to_string(epochs);
    if (key == "seed") return std::to_string(seed);
    if (key == "retrieval_topk") return std::to_string(retrieval_topk);
    if (key == "grad_clip") return fmt(grad_clip);
    if (key == "anls_tau") return fmt(metrics.tau);
    if (key == "lowercase") return fmt(metrics.lowercase);
    if (key == "strip_punct") return fmt(metrics.strip_punct);
    if (key == "train") return train_path;
    if (key == "dev") return dev_path;
    if (key == "qa_corpus") return qa_corpus_path;
    if (key == "pretrained_vectors") return pretrained_vectors;
    throw ValidationError(key, "unknown configuration key");
}

void RunConfig::validate() const {
    model.validate();
    optimizer.validate();
    if (batch_size < 1) throw ValidationError("batch_size", "must be positive");
    if (epochs < 0) throw ValidationError("epochs", "must be non-negative");
    if (retrieval_topk < 0) throw ValidationError("retrieval_topk", "must be non-negative");
    if (!(grad_clip >= 0.0)) throw ValidationError("grad_clip", "must be non-negative");
    metrics.validate();
}

std::string RunConfig::to_text() const {
    std::string out;
    for (const auto& k : kKeys) out += k + " = " + get(k) + "\n";
    return out;
}

std::uint64_t RunConfig::architecture_hash() const {
    std::string text;
    for (const auto& k : kArchitectureKeys) text += k + "=" + get(k) + ";";
    return stable_hash(text);
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string trimmed = collapse_whitespace(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos) throw ValidationError("config", "expected key = value", lineno);
        const std::string key = collapse_whitespace(trimmed.substr(0, eq));
        const std::string value = collapse_whitespace(trimmed.substr(eq + 1));
        try {
            cfg.set(key, value);
        } catch (const ValidationError& e) {
            throw ValidationError("", e.what(), lineno);
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

RunConfig desk_profile() { return RunConfig{}; }

RunConfig toy_profile() {
    RunConfig cfg;
    auto& d = cfg.model.dims;
    d.word_dim = 8;
    d.ctx_dim = 8;
    d.hidden = 8;
    d.attn_hidden = 8;
    d.context_layers = 1;
    cfg.model.answer_dim = 8;
    cfg.model.hash_buckets = 4;
    cfg.retrieval_topk = 3;
    return cfg;
}

}  // namespace textvqa
