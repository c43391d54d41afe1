#pragma once

#include <string>
#include <vector>

namespace textvqa {

/// One line of a predictions file:
/// {"sample_id","answer","score","pool","p_ocr","p_add","p_special":{"yes","no","unanswerable"}}
struct PredictionRecord {
    std::string sample_id;
    std::string answer;
    double score = 0.0;
    std::string pool;
    std::vector<double> p_ocr;
    std::vector<double> p_add;
    double p_yes = 0.0;
    double p_no = 0.0;
    double p_unanswerable = 0.0;

    bool operator==(const PredictionRecord&) const = default;
};

std::string prediction_to_json(const PredictionRecord& p);
PredictionRecord prediction_from_json(const std::string& line, std::size_t lineno = 0);

void write_predictions(const std::vector<PredictionRecord>& preds, const std::string& path);
std::vector<PredictionRecord> read_predictions(const std::string& path);

}  // namespace textvqa
