#pragma once

// Dataset schema, JSONL loading/writing and the synthetic corpus generator.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace textvqa {

/// Four corners, clockwise from top-left: (x1,y1) TL, (x2,y2) TR, (x3,y3) BR, (x4,y4) BL.
struct Quad {
    std::array<double, 8> v{};

    static Quad from_box(double left, double top, double right, double bottom) {
        return Quad{{left, top, right, top, right, bottom, left, bottom}};
    }

    double x(int corner) const { return v[static_cast<std::size_t>(2 * corner)]; }
    double y(int corner) const { return v[static_cast<std::size_t>(2 * corner + 1)]; }
    double center_x() const { return (v[0] + v[2] + v[4] + v[6]) / 4.0; }
    double center_y() const { return (v[1] + v[3] + v[5] + v[7]) / 4.0; }
    double min_x() const;
    double max_x() const;
    double min_y() const;
    double max_y() const;
    double height() const { return max_y() - min_y(); }

    bool operator==(const Quad&) const = default;
};

struct OcrToken {
    std::string text;
    Quad quad;

    bool operator==(const OcrToken&) const = default;
};

struct SceneObject {
    std::string name;
    std::vector<std::string> attributes;
    Quad quad;

    bool operator==(const SceneObject&) const = default;
};

struct Sample {
    std::string sample_id;
    double image_width = 0.0;
    double image_height = 0.0;
    std::string question;
    std::vector<std::string> gold_answers;
    std::vector<OcrToken> ocr_tokens;
    std::vector<SceneObject> objects;
    std::optional<std::vector<std::string>> dictionary;

    bool operator==(const Sample&) const = default;
};

struct Dataset {
    std::string name;
    std::vector<Sample> samples;

    bool operator==(const Dataset&) const = default;
};

enum class Split { train, dev, test };

Split parse_split(const std::string& s);

struct LoadReport {
    std::size_t lines = 0;
    std::size_t blank = 0;
    std::size_t loaded = 0;
    std::size_t rejected = 0;
    /// Records loaded with at least one clamped coordinate.
    std::size_t warned = 0;
    std::size_t clamped_coordinates = 0;
    std::vector<std::string> messages;
};

struct LoadOptions {
    /// Strict loading throws on the first bad record; lenient loading rejects
    /// it, records why, and continues.
    bool strict = true;
};

/// Reads a JSONL dataset. Out-of-image coordinates are clamped and counted.
/// Throws IoError (missing file) or ValidationError (line + field).
Dataset load_dataset(const std::string& path, Split split, LoadReport* report = nullptr,
                     const LoadOptions& opts = {});

/// Parses one record; `line` is used for error messages only.
Sample parse_sample(const std::string& json_line, Split split, std::size_t line = 0,
                    std::size_t* clamped = nullptr);

std::string sample_to_json(const Sample& s);
void write_dataset(const Dataset& d, const std::string& path);

struct SyntheticConfig {
    int num_samples = 200;
    int vocab_size = 60;
    std::uint64_t seed = 0;
};

enum class QuestionFamily { sign_text, word_on_object, yes_no, unanswerable };

/// Family of a synthetic sample, recovered from its question template.
std::optional<QuestionFamily> synthetic_family(const Sample& s);

/// Deterministic desk-scale corpus on a 1000x1000 canvas. Families rotate
/// through sign text, word-on-object, yes/no and unanswerable questions.
Dataset generate_synthetic(const SyntheticConfig& cfg);

/// Index of the token whose quad center is nearest (Euclidean) to the object's
/// quad center; ties go to the lower index. -1 when there are no tokens.
int nearest_token(const std::vector<OcrToken>& tokens, const SceneObject& object);

}  // namespace textvqa
