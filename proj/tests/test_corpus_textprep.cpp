#include "support.hpp"

#include "textvqa/corpus.hpp"
#include "textvqa/error.hpp"
#include "textvqa/text.hpp"
#include "textvqa/textprep.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

namespace textvqa {
namespace {

using testing::box;
using testing::token_at;

std::string temp_file(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / ("textvqa_test_" + name);
    std::ofstream(path) << content;
    return path.string();
}

const char* kRecord =
    R"({"sample_id":"s1","image_width":100,"image_height":50,"question":"what?","answers":["a"],)"
    R"("ocr":[{"text":"a","quad":[10,10,20,10,20,20,10,20]}],"objects":[]})";

std::vector<std::string> texts_in_order(const std::vector<OcrToken>& tokens, const ReadingOrder& ro) {
    std::vector<std::string> out;
    for (auto i : ro.order) out.push_back(tokens[i].text);
    return out;
}

// ---- loader ------------------------------------------------------------------

TEST(Loader, ParsesRecord) {
    const Sample s = parse_sample(kRecord, Split::train);
    EXPECT_EQ(s.sample_id, "s1");
    ASSERT_EQ(s.ocr_tokens.size(), 1u);
    EXPECT_EQ(s.ocr_tokens[0].quad, box(10, 10, 20, 20));
    EXPECT_FALSE(s.dictionary.has_value());
}

TEST(Loader, ZeroWidthNamesField) {
    std::string rec = kRecord;
    rec.replace(rec.find("\"image_width\":100"), 17, "\"image_width\":0");
    try {
        parse_sample(rec, Split::train, 4);
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "image_width");
        EXPECT_EQ(e.line(), 4u);
    }
}

TEST(Loader, ClampsOutOfBoundsCoordinates) {
    std::string rec = kRecord;
    rec.replace(rec.find("[10,10,20,10"), 12, "[105,10,20,10");
    const auto path = temp_file("clamp.jsonl", rec + "\n\n");
    LoadReport report;
    const auto d = load_dataset(path, Split::train, &report);
    ASSERT_EQ(d.samples.size(), 1u);
    EXPECT_DOUBLE_EQ(d.samples[0].ocr_tokens[0].quad.x(0), 100.0);
    EXPECT_EQ(report.warned, 1u);
    EXPECT_EQ(report.clamped_coordinates, 1u);
    EXPECT_EQ(report.blank, 1u);
}

TEST(Loader, TestSplitAllowsNoAnswers) {
    std::string rec = kRecord;
    rec.replace(rec.find("[\"a\"]"), 5, "[]");
    EXPECT_THROW(parse_sample(rec, Split::train), ValidationError);
    EXPECT_NO_THROW(parse_sample(rec, Split::test));
}

TEST(Loader, DuplicateIdsAndLenientMode) {
    const auto path = temp_file("dup.jsonl", std::string(kRecord) + "\n" + kRecord + "\n{broken\n");
    EXPECT_THROW(load_dataset(path, Split::train), ValidationError);
    LoadReport report;
    LoadOptions lenient;
    lenient.strict = false;
    const auto d = load_dataset(path, Split::train, &report, lenient);
    EXPECT_EQ(d.samples.size(), 1u);
    EXPECT_EQ(report.rejected, 2u);
    EXPECT_THROW(load_dataset("/nonexistent/file.jsonl", Split::train), IoError);
}

TEST(Loader, WriteReadRoundTrip) {
    const auto d = generate_synthetic({12, 20, 3});
    const auto path = (std::filesystem::temp_directory_path() / "textvqa_test_roundtrip.jsonl").string();
    write_dataset(d, path);
    const auto back = load_dataset(path, Split::train);
    ASSERT_EQ(back.samples.size(), d.samples.size());
    for (std::size_t i = 0; i < d.samples.size(); ++i) EXPECT_EQ(back.samples[i], d.samples[i]);
}

// ---- synthetic -----------------------------------------------------------------

TEST(Synthetic, DeterministicAndWellFormed) {
    const auto a = generate_synthetic({40, 30, 9});
    const auto b = generate_synthetic({40, 30, 9});
    EXPECT_EQ(a, b);
    EXPECT_NE(a, generate_synthetic({40, 30, 10}));
    std::set<QuestionFamily> families;
    for (const auto& s : a.samples) {
        EXPECT_GE(s.ocr_tokens.size(), 3u);
        EXPECT_LE(s.ocr_tokens.size(), 8u);
        EXPECT_GE(s.objects.size(), 1u);
        EXPECT_LE(s.objects.size(), 4u);
        EXPECT_EQ(s.image_width, 1000.0);
        ASSERT_EQ(s.gold_answers.size(), 1u);
        const auto fam = synthetic_family(s);
        ASSERT_TRUE(fam.has_value());
        families.insert(*fam);
        for (const auto& t : s.ocr_tokens) {
            EXPECT_GE(t.quad.min_x(), 0.0);
            EXPECT_LE(t.quad.max_x(), 1000.0);
        }
    }
    EXPECT_EQ(families.size(), 4u);
}

TEST(Synthetic, ObjectQuestionsAnswerWithNearestToken) {
    const auto d = generate_synthetic({80, 40, 2});
    for (const auto& s : d.samples) {
        if (synthetic_family(s) != QuestionFamily::word_on_object) continue;
        const std::string name = s.question.substr(20, s.question.size() - 21);
        const auto it = std::find_if(s.objects.begin(), s.objects.end(), [&](auto& o) { return o.name == name; });
        ASSERT_NE(it, s.objects.end());
        EXPECT_EQ(s.gold_answers[0], s.ocr_tokens[static_cast<std::size_t>(nearest_token(s.ocr_tokens, *it))].text);
    }
}

TEST(Synthetic, NearestTokenRule) {
    SceneObject obj{"bus", {}, box(50, 50, 150, 150)};
    const std::vector<OcrToken> tokens{token_at("far", 900, 900), token_at("near", 110, 100)};
    EXPECT_EQ(nearest_token(tokens, obj), 1);
    EXPECT_EQ(nearest_token({}, obj), -1);
    const std::vector<OcrToken> tied{token_at("l", 90, 100), token_at("r", 110, 100)};
    EXPECT_EQ(nearest_token(tied, obj), 0);
}

TEST(Synthetic, RejectsBadConfig) {
    EXPECT_THROW(generate_synthetic({0, 30, 1}), ValidationError);
    EXPECT_THROW(generate_synthetic({10, 3, 1}), ValidationError);
}

// ---- reading order ---------------------------------------------------------------

TEST(ReadingOrder, LeftToRight) {
    const std::vector<OcrToken> t{token_at("right", 200, 50), token_at("left", 10, 50)};
    const auto ro = compute_reading_order(t, 1000, 1000);
    EXPECT_EQ(texts_in_order(t, ro), (std::vector<std::string>{"left", "right"}));
}

TEST(ReadingOrder, TopToBottomSeparateLines) {
    const std::vector<OcrToken> t{token_at("bottom", 10, 300, 20, 20), token_at("top", 10, 50, 20, 20)};
    const auto ro = compute_reading_order(t, 1000, 1000);
    EXPECT_EQ(texts_in_order(t, ro), (std::vector<std::string>{"top", "bottom"}));
    EXPECT_EQ(ro.line_ids, (std::vector<std::size_t>{0, 1}));
}

TEST(ReadingOrder, FourTokenClustering) {
    const std::vector<OcrToken> t{token_at("a", 300, 48), token_at("b", 20, 52), token_at("c", 40, 210),
                                  token_at("d", 260, 205)};
    const auto ro = compute_reading_order(t, 1000, 1000);
    EXPECT_EQ(texts_in_order(t, ro), (std::vector<std::string>{"b", "a", "c", "d"}));
    EXPECT_EQ(ro.line_ids, (std::vector<std::size_t>{0, 0, 1, 1}));
}

TEST(ReadingOrder, EmptyAndTies) {
    EXPECT_TRUE(compute_reading_order({}, 10, 10).order.empty());
    const std::vector<OcrToken> t{token_at("x", 50, 50), token_at("y", 50, 50)};
    EXPECT_EQ(compute_reading_order(t, 100, 100).order, (std::vector<std::size_t>{0, 1}));
}

TEST(ReadingOrder, ScaleInvariantOnRandomLayouts) {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<OcrToken> t;
        const auto n = rng.between(1, 9);
        for (long k = 0; k < n; ++k) {
            t.push_back(token_at("t" + std::to_string(k), rng.uniform(20, 980), rng.uniform(20, 980), rng.uniform(10, 60),
                                 rng.uniform(10, 40)));
        }
        const double s = rng.uniform(0.1, 5.0);
        auto scaled = t;
        for (auto& tok : scaled) {
            for (auto& v : tok.quad.v) v *= s;
        }
        const auto a = compute_reading_order(t, 1000, 1000);
        const auto b = compute_reading_order(scaled, 1000 * s, 1000 * s);
        ASSERT_EQ(a.order, b.order);
        auto sorted = a.order;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i) ASSERT_EQ(sorted[i], i);
        ASSERT_TRUE(std::is_sorted(a.line_ids.begin(), a.line_ids.end()));
    }
}

TEST(ReadingOrder, SignContext) {
    const std::vector<OcrToken> t{token_at("turn", 300, 100), token_at("No", 100, 100), token_at("buses", 300, 200),
                                  token_at("right", 200, 100), token_at("except", 150, 200)};
    const auto ro = compute_reading_order(t, 400, 300);
    const auto ctx = build_ocr_context(t, ro, 400, 300);
    std::vector<std::string> words;
    for (const auto& w : ctx) words.push_back(w.text);
    EXPECT_EQ(join(words, " "), "No right turn except buses");
    EXPECT_EQ(ctx[0].token_index, 1u);
    EXPECT_TRUE(build_ocr_context({}, {}, 10, 10).empty());
}

// ---- positional features -----------------------------------------------------------

TEST(Positional, Examples) {
    EXPECT_EQ(positional_features(box(0, 0, 640, 480), 640, 480), (PositionalFeature{0, 0, 1, 0, 1, 1, 0, 1}));
    const auto p = positional_features(box(10, 20, 30, 40), 100, 200);
    const PositionalFeature want{0.1, 0.1, 0.3, 0.1, 0.3, 0.2, 0.1, 0.2};
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(p[static_cast<std::size_t>(i)], want[static_cast<std::size_t>(i)], 1e-15);
    EXPECT_DOUBLE_EQ(positional_features(box(10, 10, 120, 20), 100, 100)[2], 1.0);
    EXPECT_THROW(positional_features(box(0, 0, 1, 1), 0, 10), ValidationError);
}

TEST(Positional, ScaleCovariant) {
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
        const double w = rng.uniform(50, 500), h = rng.uniform(50, 500);
        const Quad q = box(rng.uniform(0, w / 2), rng.uniform(0, h / 2), rng.uniform(w / 2, w), rng.uniform(h / 2, h));
        Quad q2 = q;
        for (auto& v : q2.v) v *= 2;
        const auto a = positional_features(q, w, h);
        const auto b = positional_features(q2, 2 * w, 2 * h);
        for (std::size_t k = 0; k < 8; ++k) ASSERT_NEAR(a[k], b[k], 1e-15);
    }
}

// ---- tagging ------------------------------------------------------------------------

TEST(Tagger, Examples) {
    EXPECT_EQ(pos_ner_ids("25"), (TokenFeatureIds{static_cast<int>(PosTag::numeral), static_cast<int>(NerTag::number)}));
    EXPECT_EQ(pos_ner_ids("the"), (TokenFeatureIds{static_cast<int>(PosTag::determiner), static_cast<int>(NerTag::none)}));
    const auto ibm = pos_ner_ids("IBM");
    EXPECT_EQ(ibm.ner_id, static_cast<int>(NerTag::all_caps));
    EXPECT_TRUE(ibm.pos_id == static_cast<int>(PosTag::noun) || ibm.pos_id == static_cast<int>(PosTag::other));
    EXPECT_EQ(pos_ner_ids("?").pos_id, static_cast<int>(PosTag::punctuation));
    EXPECT_EQ(pos_ner_ids("$5").ner_id, static_cast<int>(NerTag::money_like));
}

TEST(Tagger, IdsStayInRange) {
    for (const char* w : {"a", "Paris", "run", "quickly", "12/05/2020", "5kg", "b4", "%", "and", "in", "they"}) {
        const auto ids = pos_ner_ids(w);
        EXPECT_GE(ids.pos_id, 0);
        EXPECT_LT(ids.pos_id, kNumPosTags);
        EXPECT_GE(ids.ner_id, 0);
        EXPECT_LT(ids.ner_id, kNumNerTags);
    }
}

// ---- candidates ------------------------------------------------------------------------

Sample sample_with(std::vector<OcrToken> tokens) {
    Sample s;
    s.sample_id = "c";
    s.image_width = 1000;
    s.image_height = 1000;
    s.question = "what?";
    s.ocr_tokens = std::move(tokens);
    return s;
}

std::vector<std::string> candidate_texts(const std::vector<AnswerCandidate>& cs) {
    std::vector<std::string> out;
    for (const auto& c : cs) out.push_back(c.text);
    return out;
}

TEST(Candidates, ThreeTokenSign) {
    const auto s = sample_with({token_at("turn", 300, 50), token_at("no", 100, 50), token_at("right", 200, 50)});
    const auto cs = generate_candidates(s, compute_reading_order(s.ocr_tokens, 1000, 1000), {});
    EXPECT_EQ(candidate_texts(cs),
              (std::vector<std::string>{"no", "right", "turn", "no right", "right turn", "yes", "no", "unanswerable"}));
    EXPECT_EQ(cs[3].token_indices, (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(cs[5].kind, CandidateKind::yes);
    EXPECT_EQ(cs[7].kind, CandidateKind::unanswerable);
    // union box of "no" and "right"
    EXPECT_NEAR(cs[3].positional[0], 0.08, 1e-12);
    EXPECT_NEAR(cs[3].positional[2], 0.22, 1e-12);
}

TEST(Candidates, SmallCases) {
    const auto one = sample_with({token_at("stop", 50, 50)});
    EXPECT_EQ(generate_candidates(one, compute_reading_order(one.ocr_tokens, 1000, 1000), {}).size(), 4u);
    const auto none = sample_with({});
    const auto cs = generate_candidates(none, {}, {"paris"});
    EXPECT_EQ(candidate_texts(cs), (std::vector<std::string>{"paris", "yes", "no", "unanswerable"}));
    EXPECT_EQ(cs[0].kind, CandidateKind::additional);
    EXPECT_EQ(cs[0].positional, PositionalFeature{});
}

TEST(Candidates, AdditionalTextsDeduplicatedAndSpecialsSkipped) {
    const auto none = sample_with({});
    const auto cs = generate_candidates(none, {}, {"Paris", "paris ", "yes", "rome"});
    EXPECT_EQ(candidate_texts(cs), (std::vector<std::string>{"paris", "rome", "yes", "no", "unanswerable"}));
}

TEST(Candidates, CountLawOnRandomLayouts) {
    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<OcrToken> tokens;
        const auto n = static_cast<std::size_t>(rng.between(0, 10));
        for (std::size_t k = 0; k < n; ++k) {
            tokens.push_back(token_at("w" + std::to_string(rng.below(5)), rng.uniform(20, 980), rng.uniform(20, 980)));
        }
        std::vector<std::string> add;
        const auto a = static_cast<std::size_t>(rng.below(4));
        for (std::size_t k = 0; k < a; ++k) add.push_back("extra" + std::to_string(k));
        const auto s = sample_with(tokens);
        const auto ro = compute_reading_order(tokens, 1000, 1000);
        const auto cs = generate_candidates(s, ro, add);
        ASSERT_EQ(cs.size(), n + (n > 0 ? n - 1 : 0) + a + 3);
        for (std::size_t k = n; k + 1 < 2 * n; ++k) {
            const auto& c = cs[k];
            ASSERT_EQ(c.token_indices.size(), 2u);
            ASSERT_EQ(c.text, tokens[c.token_indices[0]].text + " " + tokens[c.token_indices[1]].text);
        }
    }
}

TEST(Candidates, DictionaryMode) {
    auto s = sample_with({token_at("ignored", 50, 50)});
    EXPECT_THROW(dictionary_mode_candidates(s), ValidationError);
    s.dictionary = std::vector<std::string>{};
    EXPECT_EQ(dictionary_mode_candidates(s).size(), 3u);
    std::vector<std::string> words;
    for (int i = 0; i < 100; ++i) words.push_back("w" + std::to_string(i));
    s.dictionary = words;
    EXPECT_EQ(dictionary_mode_candidates(s).size(), 103u);
    s.dictionary = std::vector<std::string>{"coca cola"};
    const auto cs = dictionary_mode_candidates(s);
    ASSERT_EQ(cs.size(), 4u);
    EXPECT_EQ(cs[0].text, "coca cola");
    EXPECT_EQ(cs[0].positional, PositionalFeature{});
    EXPECT_TRUE(cs[0].token_indices.empty());
    EXPECT_EQ(cs[0].context_positions, (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(dictionary_context(s).size(), 2u);
}

TEST(Candidates, SyntheticGoldAlwaysReachable) {
    const auto d = generate_synthetic({200, 60, 7});
    for (const auto& s : d.samples) {
        const auto cs = generate_candidates(s, compute_reading_order(s.ocr_tokens, s.image_width, s.image_height), {});
        const auto gold = normalize_answer(s.gold_answers[0]);
        EXPECT_TRUE(std::any_of(cs.begin(), cs.end(), [&](auto& c) { return normalize_answer(c.text) == gold; }))
            << s.sample_id;
    }
}

}  // namespace
}  // namespace textvqa
