#include "support.hpp"

#include "textvqa/corpus.hpp"
#include "textvqa/metrics.hpp"
#include "textvqa/prediction.hpp"
#include "textvqa/rng.hpp"
#include "textvqa/text.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace textvqa {
namespace {

using testing::oracle_anls;
using testing::oracle_distance;
using testing::random_string;

TEST(Text, LowerCollapseNormalize) {
    EXPECT_EQ(to_lower("HeLLo"), "hello");
    EXPECT_EQ(collapse_whitespace("  a \t b\n\nc  "), "a b c");
    EXPECT_EQ(normalize_answer("  Coca   COLA "), "coca cola");
    EXPECT_EQ(to_lower("\xC3\x89T\xC3\x89"), "\xC3\x89t\xC3\x89");
}

TEST(Text, TokenizePeelsPunctuation) {
    EXPECT_EQ(tokenize("what does it say?"), (std::vector<std::string>{"what", "does", "it", "say", "?"}));
    EXPECT_EQ(tokenize("\"stop!\""), (std::vector<std::string>{"\"", "stop", "!", "\""}));
    EXPECT_TRUE(tokenize("   ").empty());
}

TEST(Text, Utf8DecodeAndHash) {
    EXPECT_EQ(utf8_decode("a\xC3\xA9"), (std::u32string{U'a', U'é'}));
    EXPECT_EQ(utf8_decode("\xFF"), std::u32string(1, U'�'));
    EXPECT_EQ(stable_hash("abc"), stable_hash("abc"));
    EXPECT_NE(stable_hash("abc"), stable_hash("abd"));
    EXPECT_EQ(join({"a", "b", "c"}, "-"), "a-b-c");
}

TEST(Levenshtein, Examples) {
    EXPECT_EQ(levenshtein("", "abc"), 3u);
    EXPECT_EQ(levenshtein("a", "a"), 0u);
    EXPECT_EQ(levenshtein("kitten", "sitting"), 3u);
    EXPECT_EQ(levenshtein("caf\xC3\xA9", "cafe"), 1u);
    EXPECT_DOUBLE_EQ(normalized_levenshtein("", ""), 0.0);
}

TEST(Levenshtein, MatchesRecursiveOracle) {
    Rng rng(11);
    for (int t = 0; t < 300; ++t) {
        const auto a = random_string(rng, 12);
        const auto b = random_string(rng, 12);
        ASSERT_EQ(levenshtein(a, b), oracle_distance(a, b)) << a << " / " << b;
        EXPECT_EQ(levenshtein(a, b), levenshtein(b, a));
    }
}

TEST(Anls, Examples) {
    EXPECT_DOUBLE_EQ(anls_score("STOP", {"stop"}), 1.0);
    EXPECT_DOUBLE_EQ(anls_score("helo", {"hello"}), 0.8);
    // normalized distance exactly 0.5 is already zeroed
    EXPECT_DOUBLE_EQ(anls_score("ab", {"ax"}), 0.0);
    EXPECT_DOUBLE_EQ(anls_score("abcd", {"wxyz"}), 0.0);
    EXPECT_DOUBLE_EQ(anls_score("", {""}), 1.0);
    EXPECT_DOUBLE_EQ(anls_score("helo", {"zzzz", "hello"}), 0.8);
}

TEST(Anls, RespectsTauAndPunctuation) {
    MetricsConfig loose;
    loose.tau = 0.9;
    EXPECT_DOUBLE_EQ(anls_score("ab", {"ax"}, loose), 0.5);
    MetricsConfig strip;
    strip.strip_punct = true;
    EXPECT_DOUBLE_EQ(anls_score("stop!", {"stop"}, strip), 1.0);
    EXPECT_LT(anls_score("stop!", {"stop"}), 1.0);
    MetricsConfig bad;
    bad.tau = 0.0;
    EXPECT_THROW(bad.validate(), std::exception);
}

TEST(Anls, MatchesOracleOnRandomPairs) {
    Rng rng(5);
    for (int t = 0; t < 300; ++t) {
        const auto p = random_string(rng, 12);
        std::vector<std::string> gold{random_string(rng, 12), random_string(rng, 12)};
        ASSERT_NEAR(anls_score(p, gold), oracle_anls(p, gold), 1e-12);
    }
}

TEST(VqaAccuracy, Examples) {
    EXPECT_DOUBLE_EQ(vqa_accuracy_score("red", {"red", "red", "red", "blue"}), 1.0);
    EXPECT_DOUBLE_EQ(vqa_accuracy_score("red", {"red", "blue", "green"}), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(vqa_accuracy_score("red", {"Red ", "blue"}), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(vqa_accuracy_score("red", {"blue"}), 0.0);
}

TEST(Aggregate, MissingPredictionsScoreZero) {
    GoldMap gold{{"a", {"x"}}, {"b", {"y"}}};
    PredictionMap pred{{"a", "x"}, {"zzz", "q"}};
    std::size_t missing = 0;
    EXPECT_DOUBLE_EQ(anls(pred, gold, {}, &missing), 0.5);
    EXPECT_EQ(missing, 1u);
    const auto report = evaluate(pred, gold);
    EXPECT_EQ(report.num_questions, 2u);
    EXPECT_EQ(report.extra_predictions, 1u);
    EXPECT_NE(report.to_json().find("\"anls\""), std::string::npos);
}

TEST(Aggregate, SubsetsBySamplePrefix) {
    GoldMap gold{{"sign-1", {"x"}}, {"sign-2", {"y"}}, {"obj-1", {"z"}}};
    PredictionMap pred{{"sign-1", "x"}, {"sign-2", "q"}, {"obj-1", "z"}};
    EvalOptions opts;
    opts.subset_delimiter = '-';
    const auto report = evaluate(pred, gold, opts);
    ASSERT_EQ(report.subsets.size(), 2u);
    EXPECT_DOUBLE_EQ(report.subsets.at("sign").anls, 0.5);
    EXPECT_DOUBLE_EQ(report.subsets.at("obj").anls, 1.0);
}

TEST(Predictions, JsonRoundTrip) {
    PredictionRecord p{"s1", "stop", 0.75, "ocr_span", {0.75, 0.25}, {}, 0.1, 0.2, 0.3};
    EXPECT_EQ(prediction_from_json(prediction_to_json(p)), p);
    EXPECT_THROW(prediction_from_json("{not json", 3), std::exception);
}

}  // namespace
}  // namespace textvqa
