#include "textvqa/corpus.hpp"

#include "textvqa/error.hpp"
#include "textvqa/rng.hpp"
#include "textvqa/text.hpp"
#include "textvqa/textprep.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_set>

namespace textvqa {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

double Quad::min_x() const { return std::min({v[0], v[2], v[4], v[6]}); }
double Quad::max_x() const { return std::max({v[0], v[2], v[4], v[6]}); }
double Quad::min_y() const { return std::min({v[1], v[3], v[5], v[7]}); }
double Quad::max_y() const { return std::max({v[1], v[3], v[5], v[7]}); }

Split parse_split(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "dev") return Split::dev;
    if (s == "test") return Split::test;
    throw ValidationError("split", "expected train, dev or test, got '" + s + "'");
}

namespace {

std::string require_string(const json& obj, const std::string& key, const std::string& field, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(field, "missing", line);
    if (!it->is_string()) throw ValidationError(field, "expected a string", line);
    return it->get<std::string>();
}

double require_number(const json& obj, const std::string& key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(key, "missing", line);
    if (!it->is_number()) throw ValidationError(key, "expected a number", line);
    const double v = it->get<double>();
    if (!std::isfinite(v)) throw ValidationError(key, "must be finite", line);
    return v;
}

std::vector<std::string> string_list(const json& obj, const std::string& key, const std::string& field,
                                     std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(field, "missing", line);
    if (!it->is_array()) throw ValidationError(field, "expected an array of strings", line);
    std::vector<std::string> out;
    for (const auto& e : *it) {
        if (!e.is_string()) throw ValidationError(field, "expected an array of strings", line);
        out.push_back(e.get<std::string>());
    }
    return out;
}

Quad parse_quad(const json& obj, const std::string& field, double width, double height, std::size_t line,
                std::size_t& clamped) {
    auto it = obj.find("quad");
    if (it == obj.end()) throw ValidationError(field, "missing", line);
    if (!it->is_array() || it->size() != 8) throw ValidationError(field, "expected 8 numbers", line);
    Quad q;
    for (std::size_t i = 0; i < 8; ++i) {
        const auto& e = (*it)[i];
        if (!e.is_number()) throw ValidationError(field, "expected 8 numbers", line);
        double v = e.get<double>();
        if (!std::isfinite(v)) throw ValidationError(field, "coordinates must be finite", line);
        const double hi = (i % 2 == 0) ? width : height;
        const double c = std::clamp(v, 0.0, hi);
        if (c != v) ++clamped;
        q.v[i] = c;
    }
    return q;
}

}  // namespace

Sample parse_sample(const std::string& json_line, Split split, std::size_t line, std::size_t* clamped_out) {
    json rec;
    try {
        rec = json::parse(json_line);
    } catch (const json::parse_error& e) {
        throw ValidationError("", std::string("malformed JSON: ") + e.what(), line);
    }
    if (!rec.is_object()) throw ValidationError("", "record must be a JSON object", line);

    Sample s;
    s.sample_id = require_string(rec, "sample_id", "sample_id", line);
    if (s.sample_id.empty()) throw ValidationError("sample_id", "must be non-empty", line);
    s.image_width = require_number(rec, "image_width", line);
    s.image_height = require_number(rec, "image_height", line);
    if (s.image_width <= 0) throw ValidationError("image_width", "must be positive", line);
    if (s.image_height <= 0) throw ValidationError("image_height", "must be positive", line);
    s.question = require_string(rec, "question", "question", line);
    if (collapse_whitespace(s.question).empty()) throw ValidationError("question", "must be non-empty", line);
    s.gold_answers = string_list(rec, "answers", "answers", line);
    if (split != Split::test && s.gold_answers.empty()) {
        throw ValidationError("answers", "train/dev records need at least one answer", line);
    }

    std::size_t clamped = 0;
    auto ocr = rec.find("ocr");
    if (ocr == rec.end() || !ocr->is_array()) throw ValidationError("ocr", "expected an array", line);
    for (std::size_t i = 0; i < ocr->size(); ++i) {
        const auto& t = (*ocr)[i];
        const std::string field = "ocr[" + std::to_string(i) + "]";
        if (!t.is_object()) throw ValidationError(field, "expected an object", line);
        OcrToken tok;
        tok.text = require_string(t, "text", field + ".text", line);
        if (tok.text.empty()) throw ValidationError(field + ".text", "must be non-empty", line);
        if (tok.text.find('\n') != std::string::npos) {
            throw ValidationError(field + ".text", "must not contain a newline", line);
        }
        tok.quad = parse_quad(t, field + ".quad", s.image_width, s.image_height, line, clamped);
        s.ocr_tokens.push_back(std::move(tok));
    }

    auto objs = rec.find("objects");
    if (objs == rec.end() || !objs->is_array()) throw ValidationError("objects", "expected an array", line);
    for (std::size_t i = 0; i < objs->size(); ++i) {
        const auto& o = (*objs)[i];
        const std::string field = "objects[" + std::to_string(i) + "]";
        if (!o.is_object()) throw ValidationError(field, "expected an object", line);
        SceneObject obj;
        obj.name = require_string(o, "name", field + ".name", line);
        if (collapse_whitespace(obj.name).empty()) throw ValidationError(field + ".name", "must be non-empty", line);
        obj.attributes = string_list(o, "attributes", field + ".attributes", line);
        obj.quad = parse_quad(o, field + ".quad", s.image_width, s.image_height, line, clamped);
        s.objects.push_back(std::move(obj));
    }

    if (auto d = rec.find("dictionary"); d != rec.end() && !d->is_null()) {
        s.dictionary = string_list(rec, "dictionary", "dictionary", line);
    }
    if (clamped_out) *clamped_out = clamped;
    return s;
}

Dataset load_dataset(const std::string& path, Split split, LoadReport* report, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file: " + path);
    LoadReport local;
    LoadReport& rep = report ? *report : local;
    rep = LoadReport{};

    Dataset d;
    d.name = path;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        ++rep.lines;
        if (collapse_whitespace(line).empty()) {
            ++rep.blank;
            continue;
        }
        try {
            std::size_t clamped = 0;
            Sample s = parse_sample(line, split, lineno, &clamped);
            if (!ids.insert(s.sample_id).second) {
                throw ValidationError("sample_id", "duplicate sample_id '" + s.sample_id + "'", lineno);
            }
            if (clamped) {
                ++rep.warned;
                rep.clamped_coordinates += clamped;
                rep.messages.push_back("line " + std::to_string(lineno) + ": clamped " + std::to_string(clamped) +
                                       " coordinate(s) to image bounds");
            }
            d.samples.push_back(std::move(s));
            ++rep.loaded;
        } catch (const ValidationError& e) {
            if (opts.strict) throw;
            ++rep.rejected;
            rep.messages.emplace_back(e.what());
        }
    }
    return d;
}

std::string sample_to_json(const Sample& s) {
    ojson rec;
    rec["sample_id"] = s.sample_id;
    rec["image_width"] = s.image_width;
    rec["image_height"] = s.image_height;
    rec["question"] = s.question;
    rec["answers"] = s.gold_answers;
    ojson ocr = ojson::array();
    for (const auto& t : s.ocr_tokens) {
        ojson o;
        o["text"] = t.text;
        o["quad"] = t.quad.v;
        ocr.push_back(std::move(o));
    }
    rec["ocr"] = std::move(ocr);
    ojson objs = ojson::array();
    for (const auto& obj : s.objects) {
        ojson o;
        o["name"] = obj.name;
        o["attributes"] = obj.attributes;
        o["quad"] = obj.quad.v;
        objs.push_back(std::move(o));
    }
    rec["objects"] = std::move(objs);
    if (s.dictionary) rec["dictionary"] = *s.dictionary;
    return rec.dump();
}

void write_dataset(const Dataset& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write dataset file: " + path);
    for (const auto& s : d.samples) out << sample_to_json(s) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

int nearest_token(const std::vector<OcrToken>& tokens, const SceneObject& object) {
    int best = -1;
    double best_d = 0.0;
    const double ox = object.quad.center_x();
    const double oy = object.quad.center_y();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const double dx = tokens[i].quad.center_x() - ox;
        const double dy = tokens[i].quad.center_y() - oy;
        const double d = dx * dx + dy * dy;
        if (best < 0 || d < best_d) {
            best = static_cast<int>(i);
            best_d = d;
        }
    }
    return best;
}

// ---- synthetic corpus ----------------------------------------------------------

namespace {

constexpr double kCanvas = 1000.0;
constexpr int kGrid = 4;
constexpr double kCell = kCanvas / kGrid;

const std::vector<std::string> kObjectNames = {"bus",  "car",  "truck", "sign",  "shop",  "door",
                                               "bottle", "shirt", "board", "wall", "train", "boat"};
const std::vector<std::string> kAttributes = {"red", "blue", "green", "white", "black", "yellow", "big", "small"};

const char* kSignQuestion = "what does the sign say?";
const char* kObjectQuestionPrefix = "what word is on the ";
const char* kYesNoPrefix = "is there a ";
const char* kYesNoSuffix = " in the picture?";
const char* kUnanswerablePrefix = "what is written on the ";

std::vector<std::string> make_vocabulary(int size, Rng& rng) {
    static const std::string consonants = "bdfgklmnprstvz";
    static const std::string vowels = "aeiou";
    std::set<std::string> reserved(kObjectNames.begin(), kObjectNames.end());
    reserved.insert(kAttributes.begin(), kAttributes.end());
    for (const char* w : {"yes", "no", "unanswerable", "the", "a", "on", "in", "is", "it"}) reserved.insert(w);
    std::unordered_set<std::string> seen;
    std::vector<std::string> out;
    while (static_cast<int>(out.size()) < size) {
        const int syllables = static_cast<int>(rng.between(2, 3));
        std::string w;
        for (int s = 0; s < syllables; ++s) {
            w.push_back(consonants[rng.below(consonants.size())]);
            w.push_back(vowels[rng.below(vowels.size())]);
        }
        if (rng.coin(0.3)) w.push_back(consonants[rng.below(consonants.size())]);
        if (reserved.count(w) || !seen.insert(w).second) continue;
        out.push_back(std::move(w));
    }
    return out;
}

struct Cell {
    int row;
    int col;
};

double cell_cx(int col) { return kCell * (col + 0.5); }
double cell_cy(int row) { return kCell * (row + 0.5); }

Quad token_quad(double cx, double cy, const std::string& text) {
    const double half_w = (14.0 * static_cast<double>(text.size()) + 10.0) / 2.0;
    const double half_h = 15.0;
    return Quad::from_box(std::round(cx - half_w), std::round(cy - half_h), std::round(cx + half_w),
                          std::round(cy + half_h));
}

std::string upper(std::string s) {
    for (auto& c : s) {
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    }
    return s;
}

class SceneBuilder {
public:
    SceneBuilder(Rng& rng, const std::vector<std::string>& vocab) : rng_(rng), vocab_(vocab) {
        for (int r = 0; r < kGrid; ++r) {
            for (int c = 0; c < kGrid; ++c) free_.push_back({r, c});
        }
        rng_.shuffle(free_);
    }

    bool take(Cell cell) {
        auto it = std::find_if(free_.begin(), free_.end(),
                               [&](const Cell& c) { return c.row == cell.row && c.col == cell.col; });
        if (it == free_.end()) return false;
        free_.erase(it);
        return true;
    }

    Cell take_any() {
        Cell c = free_.back();
        free_.pop_back();
        return c;
    }

    std::size_t free_cells() const { return free_.size(); }

    std::string fresh_word() {
        for (;;) {
            const std::string& w = rng_.pick(vocab_);
            if (used_words_.insert(w).second) return w;
        }
    }

    OcrToken token_in(Cell cell, const std::string& text) {
        const double cx = cell_cx(cell.col) + rng_.uniform(-30.0, 30.0);
        const double cy = cell_cy(cell.row) + rng_.uniform(-5.0, 5.0);
        return {text, token_quad(cx, cy, text)};
    }

    SceneObject object_in(Cell cell, const std::string& name) {
        SceneObject o;
        o.name = name;
        if (rng_.coin(0.5)) o.attributes.push_back(rng_.pick(kAttributes));
        const double cx = cell_cx(cell.col) + rng_.uniform(-20.0, 20.0);
        const double cy = cell_cy(cell.row) + rng_.uniform(-5.0, 5.0);
        const double hw = rng_.uniform(50.0, 100.0);
        const double hh = rng_.uniform(50.0, 100.0);
        o.quad = Quad::from_box(std::round(cx - hw), std::round(cy - hh), std::round(cx + hw), std::round(cy + hh));
        return o;
    }

private:
    Rng& rng_;
    const std::vector<std::string>& vocab_;
    std::vector<Cell> free_;
    std::unordered_set<std::string> used_words_;
};

std::vector<std::string> pick_names(Rng& rng, std::size_t n) {
    std::vector<std::string> names = kObjectNames;
    rng.shuffle(names);
    names.resize(n);
    return names;
}

std::string absent_name(Rng& rng, const std::vector<SceneObject>& objects) {
    for (;;) {
        const std::string& n = rng.pick(kObjectNames);
        const bool present =
            std::any_of(objects.begin(), objects.end(), [&](const SceneObject& o) { return o.name == n; });
        if (!present) return n;
    }
}

const char* family_prefix(QuestionFamily f) {
    switch (f) {
        case QuestionFamily::sign_text: return "sign";
        case QuestionFamily::word_on_object: return "object";
        case QuestionFamily::yes_no: return "yesno";
        case QuestionFamily::unanswerable: return "unans";
    }
    return "sample";
}

Sample make_sample(int index, QuestionFamily family, Rng& rng, const std::vector<std::string>& vocab) {
    Sample s;
    char id[32];
    std::snprintf(id, sizeof id, "%s-%05d", family_prefix(family), index);
    s.sample_id = id;
    s.image_width = kCanvas;
    s.image_height = kCanvas;

    SceneBuilder scene(rng, vocab);
    const auto n_tokens = static_cast<std::size_t>(rng.between(3, 8));
    const auto n_objects = static_cast<std::size_t>(rng.between(1, 4));
    const auto names = pick_names(rng, n_objects);

    if (family == QuestionFamily::sign_text) {
        const std::size_t span = rng.coin(0.5) ? 1 : 2;
        const int row = static_cast<int>(rng.between(0, kGrid - 1));
        const int col = static_cast<int>(rng.between(0, kGrid - static_cast<int>(span)));
        std::vector<std::string> sign_words;
        for (std::size_t k = 0; k < span; ++k) {
            const Cell c{row, col + static_cast<int>(k)};
            scene.take(c);
            const std::string w = upper(scene.fresh_word());
            sign_words.push_back(w);
            s.ocr_tokens.push_back(scene.token_in(c, w));
        }
        while (s.ocr_tokens.size() < n_tokens) s.ocr_tokens.push_back(scene.token_in(scene.take_any(), scene.fresh_word()));
        for (const auto& name : names) s.objects.push_back(scene.object_in(scene.take_any(), name));
        s.question = kSignQuestion;
        s.gold_answers = {join(sign_words, " ")};
    } else if (family == QuestionFamily::word_on_object) {
        for (const auto& name : names) {
            const Cell c = scene.take_any();
            SceneObject o = scene.object_in(c, name);
            const double cx = o.quad.center_x() + rng.uniform(-15.0, 15.0);
            const double cy = o.quad.center_y() + rng.uniform(-3.0, 3.0);
            const std::string w = scene.fresh_word();
            s.ocr_tokens.push_back({w, token_quad(cx, cy, w)});
            s.objects.push_back(std::move(o));
        }
        while (s.ocr_tokens.size() < n_tokens) s.ocr_tokens.push_back(scene.token_in(scene.take_any(), scene.fresh_word()));
        const auto& asked = s.objects[static_cast<std::size_t>(rng.below(s.objects.size()))];
        s.question = std::string(kObjectQuestionPrefix) + asked.name + "?";
        s.gold_answers = {s.ocr_tokens[static_cast<std::size_t>(nearest_token(s.ocr_tokens, asked))].text};
    } else {
        for (std::size_t k = 0; k < n_tokens; ++k) s.ocr_tokens.push_back(scene.token_in(scene.take_any(), scene.fresh_word()));
        for (const auto& name : names) s.objects.push_back(scene.object_in(scene.take_any(), name));
        if (family == QuestionFamily::yes_no) {
            const bool present = rng.coin(0.5);
            const std::string name = present ? rng.pick(s.objects).name : absent_name(rng, s.objects);
            s.question = std::string(kYesNoPrefix) + name + kYesNoSuffix;
            s.gold_answers = {present ? "yes" : "no"};
        } else {
            s.question = std::string(kUnanswerablePrefix) + absent_name(rng, s.objects) + "?";
            s.gold_answers = {"unanswerable"};
        }
    }
    rng.shuffle(s.ocr_tokens);
    rng.shuffle(s.objects);
    return s;
}

void verify_reachable(const Sample& s) {
    const auto order = compute_reading_order(s.ocr_tokens, s.image_width, s.image_height);
    const auto candidates = generate_candidates(s, order, {});
    const std::string gold = normalize_answer(s.gold_answers.front());
    const bool ok = std::any_of(candidates.begin(), candidates.end(),
                                [&](const AnswerCandidate& c) { return normalize_answer(c.text) == gold; });
    if (!ok) throw Error("internal", "synthetic sample " + s.sample_id + " has an unreachable answer");
}

}  // namespace

std::optional<QuestionFamily> synthetic_family(const Sample& s) {
    const std::string& q = s.question;
    if (q == kSignQuestion) return QuestionFamily::sign_text;
    if (q.rfind(kObjectQuestionPrefix, 0) == 0) return QuestionFamily::word_on_object;
    if (q.rfind(kYesNoPrefix, 0) == 0) return QuestionFamily::yes_no;
    if (q.rfind(kUnanswerablePrefix, 0) == 0) return QuestionFamily::unanswerable;
    return std::nullopt;
}

Dataset generate_synthetic(const SyntheticConfig& cfg) {
    if (cfg.num_samples < 1) throw ValidationError("num_samples", "must be at least 1");
    if (cfg.vocab_size < 10) throw ValidationError("vocab_size", "must be at least 10");
    Rng rng(cfg.seed);
    const auto vocab = make_vocabulary(cfg.vocab_size, rng);

    static const QuestionFamily kFamilies[] = {QuestionFamily::sign_text, QuestionFamily::word_on_object,
                                               QuestionFamily::yes_no, QuestionFamily::unanswerable};
    Dataset d;
    d.name = "synthetic-seed" + std::to_string(cfg.seed);
    for (int i = 0; i < cfg.num_samples; ++i) {
        Sample s = make_sample(i, kFamilies[i % 4], rng, vocab);
        verify_reachable(s);
        d.samples.push_back(std::move(s));
    }
    return d;
}

}  // namespace textvqa
