#include "textvqa/metrics.hpp"

#include "textvqa/corpus.hpp"
#include "textvqa/error.hpp"
#include "textvqa/prediction.hpp"
#include "textvqa/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <numeric>
#include <sstream>

namespace textvqa {

void MetricsConfig::validate() const {
    if (!(tau > 0.0 && tau <= 1.0)) throw ValidationError("tau", "must lie in (0, 1]");
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    const std::u32string s = utf8_decode(a);
    const std::u32string t = utf8_decode(b);
    if (s.empty()) return t.size();
    if (t.empty()) return s.size();
    std::vector<std::size_t> prev(t.size() + 1), cur(t.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= s.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= t.size(); ++j) {
            const std::size_t subst = prev[j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
        }
        std::swap(prev, cur);
    }
    return prev[t.size()];
}

double normalized_levenshtein(std::string_view a, std::string_view b) {
    const std::size_t la = utf8_decode(a).size();
    const std::size_t lb = utf8_decode(b).size();
    const std::size_t denom = std::max(la, lb);
    if (denom == 0) return 0.0;
    return static_cast<double>(levenshtein(a, b)) / static_cast<double>(denom);
}

std::string metric_normalize(std::string_view s, const MetricsConfig& cfg) {
    std::string out = cfg.lowercase ? to_lower(s) : std::string(s);
    if (cfg.strip_punct) {
        std::string kept;
        kept.reserve(out.size());
        for (char c : out) {
            if (!is_ascii_punct(c)) kept.push_back(c);
        }
        out = std::move(kept);
    }
    return collapse_whitespace(out);
}

double anls_score(std::string_view prediction, const std::vector<std::string>& gold, const MetricsConfig& cfg) {
    if (gold.empty()) throw ValidationError("answers", "ANLS needs at least one gold answer");
    const std::string p = metric_normalize(prediction, cfg);
    double best = 0.0;
    for (const auto& g : gold) {
        const double nl = normalized_levenshtein(metric_normalize(g, cfg), p);
        const double s = nl < cfg.tau ? 1.0 - nl : 0.0;
        best = std::max(best, s);
    }
    return best;
}

double vqa_accuracy_score(std::string_view prediction, const std::vector<std::string>& humans,
                          const MetricsConfig& cfg) {
    if (humans.empty()) throw ValidationError("answers", "VQA accuracy needs at least one human answer");
    const std::string p = metric_normalize(prediction, cfg);
    const auto matches = std::count_if(humans.begin(), humans.end(),
                                       [&](const std::string& h) { return metric_normalize(h, cfg) == p; });
    return std::min(static_cast<double>(matches) / 3.0, 1.0);
}

namespace {

template <typename Score>
double mean_over_gold(const PredictionMap& predictions, const GoldMap& gold, const MetricsConfig& cfg,
                      std::size_t* missing, Score score) {
    cfg.validate();
    if (gold.empty()) throw ValidationError("gold", "gold set is empty");
    double total = 0.0;
    std::size_t miss = 0;
    for (const auto& [id, answers] : gold) {
        auto it = predictions.find(id);
        std::string_view pred;
        if (it == predictions.end()) ++miss;
        else pred = it->second;
        total += score(pred, answers, cfg);
    }
    if (missing) *missing = miss;
    return total / static_cast<double>(gold.size());
}

}  // namespace

double anls(const PredictionMap& predictions, const GoldMap& gold, const MetricsConfig& cfg, std::size_t* missing) {
    return mean_over_gold(predictions, gold, cfg, missing,
                          [](std::string_view p, const auto& g, const MetricsConfig& c) { return anls_score(p, g, c); });
}

double vqa_accuracy(const PredictionMap& predictions, const GoldMap& gold, const MetricsConfig& cfg,
                    std::size_t* missing) {
    return mean_over_gold(predictions, gold, cfg, missing, [](std::string_view p, const auto& g, const MetricsConfig& c) {
        return vqa_accuracy_score(p, g, c);
    });
}

GoldMap gold_map(const Dataset& dataset) {
    GoldMap out;
    for (const auto& s : dataset.samples) out[s.sample_id] = s.gold_answers;
    return out;
}

EvalReport evaluate(const PredictionMap& predictions, const GoldMap& gold, const EvalOptions& opts) {
    opts.metrics.validate();
    if (gold.empty()) throw ValidationError("gold", "gold set is empty");
    EvalReport r;
    r.num_questions = gold.size();
    for (const auto& [id, answers] : gold) {
        SampleScore s;
        s.sample_id = id;
        if (auto it = predictions.find(id); it != predictions.end()) s.prediction = it->second;
        else ++r.missing_predictions;
        s.anls = anls_score(s.prediction, answers, opts.metrics);
        s.accuracy = vqa_accuracy_score(s.prediction, answers, opts.metrics);
        r.anls += s.anls;
        r.vqa_accuracy += s.accuracy;
        if (opts.subset_delimiter != '\0') {
            const auto cut = id.find(opts.subset_delimiter);
            auto& sub = r.subsets[cut == std::string::npos ? id : id.substr(0, cut)];
            ++sub.count;
            sub.anls += s.anls;
            sub.accuracy += s.accuracy;
        }
        r.per_sample.push_back(std::move(s));
    }
    for (const auto& [id, _] : predictions) {
        if (!gold.count(id)) ++r.extra_predictions;
    }
    r.anls /= static_cast<double>(r.num_questions);
    r.vqa_accuracy /= static_cast<double>(r.num_questions);
    for (auto& [_, sub] : r.subsets) {
        sub.anls /= static_cast<double>(sub.count);
        sub.accuracy /= static_cast<double>(sub.count);
    }
    return r;
}

EvalReport evaluate(const std::vector<PredictionRecord>& predictions, const Dataset& gold, const EvalOptions& opts) {
    PredictionMap pm;
    for (const auto& p : predictions) pm[p.sample_id] = p.answer;
    return evaluate(pm, gold_map(gold), opts);
}

EvalReport evaluate_files(const std::string& prediction_path, const std::string& gold_path, const EvalOptions& opts) {
    const auto preds = read_predictions(prediction_path);
    const auto gold = load_dataset(gold_path, Split::dev);
    return evaluate(preds, gold, opts);
}

std::string EvalReport::to_json(bool include_samples) const {
    nlohmann::ordered_json j;
    j["anls"] = anls;
    j["vqa_accuracy"] = vqa_accuracy;
    j["num_questions"] = num_questions;
    j["missing_predictions"] = missing_predictions;
    j["extra_predictions"] = extra_predictions;
    nlohmann::ordered_json subs = nlohmann::ordered_json::object();
    for (const auto& [name, s] : subsets) {
        nlohmann::ordered_json e;
        e["count"] = s.count;
        e["anls"] = s.anls;
        e["vqa_accuracy"] = s.accuracy;
        subs[name] = std::move(e);
    }
    j["subsets"] = std::move(subs);
    if (include_samples) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& s : per_sample) {
            nlohmann::ordered_json e;
            e["sample_id"] = s.sample_id;
            e["prediction"] = s.prediction;
            e["anls"] = s.anls;
            e["vqa_accuracy"] = s.accuracy;
            rows.push_back(std::move(e));
        }
        j["per_sample"] = std::move(rows);
    }
    return j.dump(2);
}

std::string EvalReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "sample_id,prediction,anls,vqa_accuracy\n";
    for (const auto& s : per_sample) {
        std::string quoted = "\"";
        for (char c : s.prediction) {
            if (c == '"') quoted += '"';
            quoted += c;
        }
        quoted += '"';
        os << s.sample_id << ',' << quoted << ',' << s.anls << ',' << s.accuracy << '\n';
    }
    return os.str();
}

}  // namespace textvqa
