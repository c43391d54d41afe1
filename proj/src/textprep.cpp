#include "textvqa/textprep.hpp"

#include "textvqa/error.hpp"
#include "textvqa/text.hpp"
#include "tagger_lexicon_data.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace textvqa {

// ---- reading order ------------------------------------------------------------

ReadingOrder compute_reading_order(const std::vector<OcrToken>& tokens, double image_width, double image_height) {
    (void)image_width;
    (void)image_height;
    ReadingOrder out;
    const std::size_t n = tokens.size();
    if (n == 0) return out;

    std::vector<double> heights;
    heights.reserve(n);
    for (const auto& t : tokens) heights.push_back(t.quad.height());
    std::sort(heights.begin(), heights.end());
    const double median = (n % 2 == 1) ? heights[n / 2] : 0.5 * (heights[n / 2 - 1] + heights[n / 2]);
    const double threshold = 0.5 * median;

    std::vector<std::size_t> by_y(n);
    std::iota(by_y.begin(), by_y.end(), std::size_t{0});
    std::stable_sort(by_y.begin(), by_y.end(), [&](std::size_t a, std::size_t b) {
        return tokens[a].quad.center_y() < tokens[b].quad.center_y();
    });

    struct Line {
        std::vector<std::size_t> members;
        double sum_y = 0.0;
        double mean() const { return sum_y / static_cast<double>(members.size()); }
    };
    std::vector<Line> lines;
    for (std::size_t idx : by_y) {
        const double cy = tokens[idx].quad.center_y();
        if (lines.empty() || std::abs(cy - lines.back().mean()) > threshold) lines.emplace_back();
        lines.back().members.push_back(idx);
        lines.back().sum_y += cy;
    }
    std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.mean() < b.mean(); });

    for (std::size_t li = 0; li < lines.size(); ++li) {
        auto members = lines[li].members;
        std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            const double xa = tokens[a].quad.center_x();
            const double xb = tokens[b].quad.center_x();
            if (xa != xb) return xa < xb;
            return a < b;
        });
        for (std::size_t idx : members) {
            out.order.push_back(idx);
            out.line_ids.push_back(li);
        }
    }
    return out;
}

PositionalFeature positional_features(const Quad& quad, double image_width, double image_height) {
    if (!(image_width > 0) || !(image_height > 0)) {
        throw ValidationError("image_size", "image dimensions must be positive");
    }
    PositionalFeature p{};
    for (std::size_t i = 0; i < 8; ++i) {
        const double denom = (i % 2 == 0) ? image_width : image_height;
        p[i] = std::clamp(quad.v[i] / denom, 0.0, 1.0);
    }
    return p;
}

std::vector<ContextWord> build_ocr_context(const std::vector<OcrToken>& tokens, const ReadingOrder& order,
                                           double image_width, double image_height) {
    if (order.order.size() != tokens.size()) throw ValidationError("order", "reading order does not match tokens");
    std::vector<ContextWord> out;
    out.reserve(tokens.size());
    for (std::size_t pos = 0; pos < order.order.size(); ++pos) {
        const std::size_t idx = order.order[pos];
        if (idx >= tokens.size()) throw ValidationError("order", "index out of range");
        out.push_back({tokens[idx].text, idx, order.line_ids[pos],
                       positional_features(tokens[idx].quad, image_width, image_height)});
    }
    return out;
}

// ---- POS / NER ------------------------------------------------------------------

namespace {

struct Lexicon {
    // section order decides precedence for words listed twice
    std::vector<std::pair<std::string, std::unordered_set<std::string>>> sections;

    const std::unordered_set<std::string>* section(std::string_view name) const {
        for (const auto& [n, words] : sections) {
            if (n == name) return &words;
        }
        return nullptr;
    }

    bool in(std::string_view name, const std::string& word) const {
        const auto* s = section(name);
        return s && s->count(word);
    }
};

const Lexicon& lexicon() {
    static const Lexicon lex = [] {
        Lexicon l;
        std::istringstream in{std::string(kTaggerLexicon)};
        std::string line;
        while (std::getline(in, line)) {
            const std::string trimmed = collapse_whitespace(line);
            if (trimmed.empty() || trimmed[0] == '#') continue;
            if (trimmed.front() == '[' && trimmed.back() == ']') {
                l.sections.emplace_back(trimmed.substr(1, trimmed.size() - 2), std::unordered_set<std::string>{});
                continue;
            }
            if (l.sections.empty()) continue;
            std::istringstream words(trimmed);
            std::string w;
            while (words >> w) l.sections.back().second.insert(w);
        }
        return l;
    }();
    return lex;
}

bool is_symbol_char(char c) {
    static const std::string symbols = "$%&@#+=<>~^|*/\\";
    return symbols.find(c) != std::string::npos;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// d{1,4} sep d{1,2} sep d{1,4} with sep in / - .
bool looks_like_date(std::string_view w) {
    int groups = 0;
    std::size_t i = 0;
    char sep = 0;
    while (i < w.size()) {
        std::size_t j = i;
        while (j < w.size() && is_digit(w[j])) ++j;
        if (j == i || j - i > 4) return false;
        ++groups;
        if (j == w.size()) break;
        const char c = w[j];
        if (c != '/' && c != '-' && c != '.') return false;
        if (sep && c != sep) return false;
        sep = c;
        i = j + 1;
        if (i == w.size()) return false;
    }
    return groups == 3;
}

}  // namespace

TokenFeatureIds pos_ner_ids(std::string_view word, const std::vector<std::string>& context) {
    (void)context;
    const Lexicon& lex = lexicon();
    const std::string w(word);
    const std::string lw = to_lower(word);

    std::size_t digits = 0, letters = 0, uppers = 0, lowers = 0, puncts = 0, symbols = 0;
    for (char c : w) {
        if (is_digit(c)) ++digits;
        else if (is_alpha(c)) {
            ++letters;
            if (is_upper(c)) ++uppers;
            if (is_lower(c)) ++lowers;
        } else if (is_symbol_char(c)) ++symbols;
        else if (is_ascii_punct(c)) ++puncts;
    }
    const std::size_t n = w.size();

    TokenFeatureIds ids;

    // POS
    PosTag pos = PosTag::other;
    if (n > 0 && symbols == n) {
        pos = PosTag::symbol;
    } else if (n > 0 && puncts + symbols == n) {
        pos = PosTag::punctuation;
    } else if (digits > 0 && letters == 0) {
        pos = PosTag::numeral;
    } else {
        static const std::pair<const char*, PosTag> kSections[] = {
            {"determiner", PosTag::determiner}, {"pronoun", PosTag::pronoun},
            {"preposition", PosTag::preposition}, {"conjunction", PosTag::conjunction},
            {"adverb", PosTag::adverb},         {"verb", PosTag::verb},
            {"adjective", PosTag::adjective},   {"numeral", PosTag::numeral},
        };
        bool found = false;
        for (const auto& [section, tag] : kSections) {
            if (lex.in(section, lw)) {
                pos = tag;
                found = true;
                break;
            }
        }
        if (!found && letters > 0 && digits == 0) {
            if (lw.size() > 4 && ends_with(lw, "ly")) pos = PosTag::adverb;
            else if (lw.size() > 4 && (ends_with(lw, "ing") || ends_with(lw, "ed"))) pos = PosTag::verb;
            else if (lw.size() > 4 && (ends_with(lw, "ous") || ends_with(lw, "ful") || ends_with(lw, "ive") ||
                                       ends_with(lw, "able") || ends_with(lw, "ible") || ends_with(lw, "al") ||
                                       ends_with(lw, "ic")))
                pos = PosTag::adjective;
            else pos = PosTag::noun;
        }
    }
    ids.pos_id = static_cast<int>(pos);

    // NER
    NerTag ner = NerTag::none;
    const bool has_currency = w.find('$') != std::string::npos || w.find("\xE2\x82\xAC") != std::string::npos ||
                              w.find("\xC2\xA3") != std::string::npos;
    if (digits > 0 && has_currency) {
        ner = NerTag::money_like;
    } else if (looks_like_date(w) || lex.in("month", lw) || lex.in("weekday", lw)) {
        ner = NerTag::date_like;
    } else if (digits > 0 && letters == 0 && w.back() == '%') {
        ner = NerTag::unit_like;
    } else if (digits > 0 && letters == 0) {
        ner = NerTag::number;
    } else if (digits > 0 && letters > 0) {
        std::size_t k = 0;
        while (k < lw.size() && (is_digit(lw[k]) || lw[k] == '.' || lw[k] == ',')) ++k;
        const std::string suffix = lw.substr(k);
        const bool unit = k > 0 && !suffix.empty() && lex.in("unit", suffix);
        ner = unit ? NerTag::unit_like : NerTag::mixed_alnum;
    } else if (letters >= 2 && lowers == 0) {
        ner = NerTag::all_caps;
    } else if (letters > 0 && is_upper(w.front()) && lowers > 0) {
        ner = NerTag::capitalized;
    }
    ids.ner_id = static_cast<int>(ner);
    return ids;
}

// ---- candidates ------------------------------------------------------------------

std::string_view to_string(CandidateKind k) {
    switch (k) {
        case CandidateKind::ocr_span: return "ocr";
        case CandidateKind::additional: return "additional";
        case CandidateKind::yes: return "yes";
        case CandidateKind::no: return "no";
        case CandidateKind::unanswerable: return "unanswerable";
    }
    return "unknown";
}

bool is_special_answer(std::string_view normalized) {
    return normalized == "yes" || normalized == "no" || normalized == "unanswerable";
}

namespace {

void append_specials(std::vector<AnswerCandidate>& out) {
    for (auto [kind, text] : {std::pair{CandidateKind::yes, "yes"}, std::pair{CandidateKind::no, "no"},
                              std::pair{CandidateKind::unanswerable, "unanswerable"}}) {
        AnswerCandidate c;
        c.kind = kind;
        c.text = text;
        out.push_back(std::move(c));
    }
}

PositionalFeature union_position(const Sample& s, const std::vector<std::size_t>& token_indices) {
    double l = s.image_width, t = s.image_height, r = 0.0, b = 0.0;
    for (std::size_t i : token_indices) {
        const Quad& q = s.ocr_tokens[i].quad;
        l = std::min(l, q.min_x());
        t = std::min(t, q.min_y());
        r = std::max(r, q.max_x());
        b = std::max(b, q.max_y());
    }
    return positional_features(Quad::from_box(l, t, r, b), s.image_width, s.image_height);
}

}  // namespace

std::vector<AnswerCandidate> generate_candidates(const Sample& sample, const ReadingOrder& order,
                                                 const std::vector<std::string>& additional_texts) {
    const std::size_t n = order.order.size();
    if (n != sample.ocr_tokens.size()) throw ValidationError("order", "reading order does not match tokens");
    std::vector<AnswerCandidate> out;

    for (std::size_t pos = 0; pos < n; ++pos) {
        AnswerCandidate c;
        c.kind = CandidateKind::ocr_span;
        c.token_indices = {order.order[pos]};
        c.context_positions = {pos};
        c.text = sample.ocr_tokens[order.order[pos]].text;
        c.positional = union_position(sample, c.token_indices);
        out.push_back(std::move(c));
    }
    for (std::size_t pos = 0; pos + 1 < n; ++pos) {
        AnswerCandidate c;
        c.kind = CandidateKind::ocr_span;
        c.token_indices = {order.order[pos], order.order[pos + 1]};
        c.context_positions = {pos, pos + 1};
        c.text = sample.ocr_tokens[order.order[pos]].text + " " + sample.ocr_tokens[order.order[pos + 1]].text;
        c.positional = union_position(sample, c.token_indices);
        c.crosses_line = order.line_ids[pos] != order.line_ids[pos + 1];
        out.push_back(std::move(c));
    }

    // context_positions of additional candidates index the concatenation of
    // their tokenized texts (see the model's additional-text context)
    std::unordered_set<std::string> seen;
    std::size_t at = 0;
    for (const auto& text : additional_texts) {
        const std::string norm = normalize_answer(text);
        if (norm.empty() || is_special_answer(norm) || !seen.insert(norm).second) continue;
        const auto words = tokenize(norm);
        if (words.empty()) continue;
        AnswerCandidate c;
        c.kind = CandidateKind::additional;
        c.text = norm;
        for (std::size_t k = 0; k < words.size(); ++k) c.context_positions.push_back(at + k);
        at += words.size();
        out.push_back(std::move(c));
    }
    append_specials(out);
    return out;
}

std::vector<ContextWord> dictionary_context(const Sample& sample) {
    if (!sample.dictionary) throw ValidationError("dictionary", "sample has no dictionary");
    std::vector<ContextWord> out;
    for (const auto& entry : *sample.dictionary) {
        for (auto& w : tokenize(entry)) {
            ContextWord cw;
            cw.text = std::move(w);
            out.push_back(std::move(cw));
        }
    }
    return out;
}

std::vector<AnswerCandidate> dictionary_mode_candidates(const Sample& sample) {
    if (!sample.dictionary) throw ValidationError("dictionary", "sample has no dictionary");
    std::vector<AnswerCandidate> out;
    std::size_t at = 0;
    for (const auto& entry : *sample.dictionary) {
        const auto words = tokenize(entry);
        if (words.empty()) continue;
        AnswerCandidate c;
        c.kind = CandidateKind::ocr_span;
        c.text = entry;
        for (std::size_t k = 0; k < words.size(); ++k) c.context_positions.push_back(at + k);
        at += words.size();
        out.push_back(std::move(c));
    }
    append_specials(out);
    return out;
}

}  // namespace textvqa
