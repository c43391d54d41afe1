#include "textvqa/prediction.hpp"

#include "textvqa/error.hpp"
#include "textvqa/text.hpp"

#include <json.hpp>

#include <fstream>

namespace textvqa {

std::string prediction_to_json(const PredictionRecord& p) {
    nlohmann::ordered_json rec;
    rec["sample_id"] = p.sample_id;
    rec["answer"] = p.answer;
    rec["score"] = p.score;
    rec["pool"] = p.pool;
    rec["p_ocr"] = p.p_ocr;
    rec["p_add"] = p.p_add;
    nlohmann::ordered_json special;
    special["yes"] = p.p_yes;
    special["no"] = p.p_no;
    special["unanswerable"] = p.p_unanswerable;
    rec["p_special"] = std::move(special);
    return rec.dump();
}

PredictionRecord prediction_from_json(const std::string& line, std::size_t lineno) {
    nlohmann::json rec;
    try {
        rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("", std::string("malformed JSON: ") + e.what(), lineno);
    }
    PredictionRecord p;
    try {
        p.sample_id = rec.at("sample_id").get<std::string>();
        p.answer = rec.at("answer").get<std::string>();
        p.score = rec.value("score", 0.0);
        p.pool = rec.value("pool", std::string{});
        p.p_ocr = rec.value("p_ocr", std::vector<double>{});
        p.p_add = rec.value("p_add", std::vector<double>{});
        if (auto it = rec.find("p_special"); it != rec.end()) {
            p.p_yes = it->value("yes", 0.0);
            p.p_no = it->value("no", 0.0);
            p.p_unanswerable = it->value("unanswerable", 0.0);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("prediction", e.what(), lineno);
    }
    return p;
}

void write_predictions(const std::vector<PredictionRecord>& preds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write predictions: " + path);
    for (const auto& p : preds) out << prediction_to_json(p) << '\n';
}

std::vector<PredictionRecord> read_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open predictions: " + path);
    std::vector<PredictionRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (collapse_whitespace(line).empty()) continue;
        out.push_back(prediction_from_json(line, lineno));
    }
    return out;
}

}  // namespace textvqa
