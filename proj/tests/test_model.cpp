#include "support.hpp"

#include "textvqa/answer.hpp"
#include "textvqa/config.hpp"
#include "textvqa/encoders.hpp"
#include "textvqa/error.hpp"
#include "textvqa/model.hpp"
#include "textvqa/retrieval.hpp"
#include "textvqa/text.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace textvqa {
namespace {

using testing::gradient_error;
using testing::max_abs_diff;
using testing::random_matrix;

EncoderDims toy_dims() {
    EncoderDims d;
    d.word_dim = 6;
    d.ctx_dim = 4;
    d.hidden = 4;
    d.context_layers = 2;
    d.attn_hidden = 5;
    return d;
}

std::vector<TokenFeatureIds> features_for(std::size_t n) {
    std::vector<TokenFeatureIds> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({static_cast<int>(i % 12), static_cast<int>(i % 8)});
    return out;
}

struct EncoderFixture {
    EncoderDims dims = toy_dims();
    ad::ParameterStore store;
    Rng rng{21};
    ContextualEncoder contextual = ContextualEncoder::create(store, "ctx", dims.word_dim, dims.ctx_dim, rng);
    QuestionEncoderParams question = QuestionEncoderParams::create(store, "q", dims, rng);
    ContextEncoderParams context = ContextEncoderParams::create(store, "c", dims, rng);
};

// ---- encoders -----------------------------------------------------------------------

TEST(Encoders, QuestionShapes) {
    EncoderFixture f;
    ad::Tape tape;
    const auto q = encode_question(tape, tape.constant(random_matrix(5, 6, f.rng)), f.contextual, f.question);
    ASSERT_EQ(q.levels.size(), 3u);
    for (const auto& l : q.levels) {
        EXPECT_EQ(l.rows(), 5);
        EXPECT_EQ(l.cols(), 4);
    }
    EXPECT_EQ(q.words.cols(), 10);
    EXPECT_EQ(q.condensed.rows(), 1);
    EXPECT_EQ(q.condensed.cols(), 4);
}

TEST(Encoders, SingleWordQuestionCondensesToItsState) {
    EncoderFixture f;
    ad::Tape tape;
    const auto q = encode_question(tape, tape.constant(random_matrix(1, 6, f.rng)), f.contextual, f.question);
    EXPECT_LT(max_abs_diff(q.attended.value(), q.levels.back().value()), 1e-15);
    EXPECT_LT(max_abs_diff(q.condensed.value(), q.levels.back().value()), 1e-15);
}

TEST(Encoders, ContextShapesAndLengthPreserved) {
    EncoderFixture f;
    ad::Tape tape;
    const auto q = encode_question(tape, tape.constant(random_matrix(3, 6, f.rng)), f.contextual, f.question);
    const auto c = encode_context(tape, tape.constant(random_matrix(4, 6, f.rng)), features_for(4), q, f.contextual,
                                  f.context);
    EXPECT_EQ(c.levels.size(), 2u);
    EXPECT_EQ(c.multilevel.size(), 3u);
    EXPECT_EQ(c.output.rows(), 4);
    EXPECT_EQ(c.output.cols(), f.dims.context_output_dim());
    EXPECT_EQ(c.features.cols(), 20);
    EXPECT_TRUE(c.output.value().allFinite());
}

TEST(Encoders, SingleTokenContextSelfAttentionIsIdentity) {
    EncoderFixture f;
    ad::Tape tape;
    const auto q = encode_question(tape, tape.constant(random_matrix(2, 6, f.rng)), f.contextual, f.question);
    const auto c = encode_context(tape, tape.constant(random_matrix(1, 6, f.rng)), features_for(1), q, f.contextual,
                                  f.context);
    EXPECT_LT(max_abs_diff(c.self_attended.value(), c.fused.value()), 1e-15);
}

TEST(Encoders, WordLevelAttention) {
    Rng rng(22);
    const AttnParams p{random_matrix(4, 3, rng), random_matrix(1, 3, rng)};
    const Matrix q1 = random_matrix(1, 4, rng);
    const Matrix out = word_level_attention(random_matrix(3, 4, rng), q1, p);
    for (Index i = 0; i < 3; ++i) EXPECT_LT(max_abs_diff(out.row(i), q1), 1e-15);
    const Matrix c = random_matrix(3, 4, rng), q = random_matrix(2, 4, rng);
    EXPECT_LT(max_abs_diff(word_level_attention(c, q, p), testing::brute_attention(c, q, q, p.U, p.D)), 1e-10);
}

TEST(Encoders, StressStaysFinite) {
    EncoderFixture f;
    for (int t = 0; t < 20; ++t) {
        ad::Tape tape;
        const auto qlen = f.rng.between(1, 6), clen = f.rng.between(1, 9);
        const auto q = encode_question(tape, tape.constant(random_matrix(qlen, 6, f.rng, 5.0)), f.contextual, f.question);
        const auto c = encode_context(tape, tape.constant(random_matrix(clen, 6, f.rng, 5.0)),
                                      features_for(static_cast<std::size_t>(clen)), q, f.contextual, f.context);
        ASSERT_TRUE(c.output.value().allFinite());
        ASSERT_EQ(c.output.rows(), clen);
    }
}

TEST(Encoders, ContextGradientAtToyDims) {
    EncoderDims dims;
    dims.word_dim = dims.ctx_dim = dims.hidden = dims.attn_hidden = 8;
    dims.context_layers = 1;
    ad::ParameterStore store;
    Rng rng(23);
    const auto contextual = ContextualEncoder::create(store, "ctx", 8, 8, rng);
    const auto qp = QuestionEncoderParams::create(store, "q", dims, rng);
    const auto cp = ContextEncoderParams::create(store, "c", dims, rng);
    const Matrix mix = random_matrix(3, 16, rng);
    EXPECT_LT(gradient_error(
                  [&](ad::Tape& t, const auto& x) {
                      const auto q = encode_question(t, x[0], contextual, qp);
                      const auto c = encode_context(t, x[1], features_for(3), q, contextual, cp);
                      return ad::sum(ad::mul(c.output, t.constant(mix)));
                  },
                  {random_matrix(2, 8, rng), random_matrix(3, 8, rng)}, 1e-5, 1e-4),
              1e-4);
}

TEST(Encoders, ObjectRenderingAndPooling) {
    const std::vector<SceneObject> objs{{"bus", {"red"}, {}}, {"traffic light", {}, {}}};
    const auto ow = render_object_words(objs);
    EXPECT_EQ(ow.words, (std::vector<std::string>{"red", "bus", "traffic", "light"}));
    EXPECT_EQ(ow.object_of_word, (std::vector<std::size_t>{0, 0, 1, 1}));
    EXPECT_EQ(ow.num_objects, 2u);
    const Matrix pool = pooling_matrix({{0, 1}, {3}}, 4);
    const Matrix want = (Matrix(2, 4) << 0.5, 0.5, 0, 0, 0, 0, 0, 1).finished();
    EXPECT_EQ(pool, want);
    const Matrix summed = (Matrix(2, 4) << 1, 1, 0, 0, 0, 0, 0, 1).finished();
    EXPECT_EQ(pooling_matrix({{0, 1}, {3}}, 4, Pooling::sum), summed);
    EXPECT_THROW(pooling_matrix({{0}, {}}, 4), ShapeError);
    EXPECT_THROW(pooling_matrix({{4}}, 4), ShapeError);
    EXPECT_EQ(parse_pooling("sum"), Pooling::sum);
    EXPECT_THROW(parse_pooling("max"), ValidationError);
    ad::Tape tape;
    Rng rng(24);
    const Matrix rows = random_matrix(4, 3, rng);
    const Matrix pooled = pool_objects(tape, tape.constant(rows), ow).value();
    EXPECT_LT(max_abs_diff(pooled.row(1), (rows.row(2) + rows.row(3)) / 2), 1e-15);
}

TEST(Encoders, IdenticalObjectsGetIdenticalRows) {
    RunConfig cfg = toy_profile();
    Sample s;
    s.sample_id = "x";
    s.image_width = s.image_height = 100;
    s.question = "what is on the bus?";
    s.gold_answers = {"a"};
    s.ocr_tokens = {testing::token_at("a", 20, 20, 10, 10)};
    const Quad q = Quad::from_box(10, 10, 30, 30);
    s.objects = {{"bus", {"red"}, q}, {"bus", {"red"}, q}};
    TextVqaModel model(cfg.model, Vocabulary({"a", "bus", "red"}, OovMode::hash_bucket, 4), 1);
    const auto prep = model.prepare(s);
    EXPECT_EQ(prep.objects.num_objects, 2u);
    EXPECT_EQ(prep.object_positions.rows(), 2);
    EXPECT_EQ(prep.object_positions.row(0), prep.object_positions.row(1));
}

// ---- answer module --------------------------------------------------------------------

struct AnswerFixture {
    ad::ParameterStore store;
    Rng rng{31};
    MatchParams params = MatchParams::create(store, "ans", 2, 3, 4, rng);
};

TEST(Answer, CandidateReprMatchesAffineReluOracle) {
    AnswerFixture f;
    ad::Tape tape;
    const Matrix u = random_matrix(1, 2, f.rng), uh = random_matrix(1, 2, f.rng);
    const Matrix got = candidate_repr(tape, tape.constant(u), tape.constant(uh), f.params).value();
    Matrix joined(1, 4);
    joined << u, uh;
    const Matrix want = (joined * f.params.fc_w->value + f.params.fc_b->value).cwiseMax(0.0);
    EXPECT_LT(max_abs_diff(got, want), 1e-12);
    for (auto& p : f.store) p.value.setZero();
    EXPECT_TRUE(candidate_repr(tape, tape.constant(u), tape.constant(uh), f.params).value().isZero());
}

TEST(Answer, IdentityFcReproducesInputs) {
    ad::ParameterStore store;
    Rng rng(32);
    const auto params = MatchParams::create(store, "ans", 2, 3, 4, rng);
    params.fc_w->value.setIdentity();
    params.fc_b->value.setZero();
    ad::Tape tape;
    Matrix u(1, 2), uh(1, 2);
    u << 0.3, 0.7;
    uh << 1.5, 0.2;
    const Matrix got = candidate_repr(tape, tape.constant(u), tape.constant(uh), params).value();
    EXPECT_EQ(got, (Matrix(1, 4) << 0.3, 0.7, 1.5, 0.2).finished());
}

TEST(Answer, MatchOcrAgainstBruteForce) {
    AnswerFixture f;
    ad::Tape tape;
    const Matrix uq = random_matrix(1, 3, f.rng), reprs = random_matrix(2, 4, f.rng);
    const Matrix got = match_ocr(tape, tape.constant(uq), tape.constant(reprs), f.params).value();
    double s[2];
    for (int i = 0; i < 2; ++i) {
        s[i] = 0;
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 4; ++b) s[i] += uq(0, a) * f.params.w_a->value(a, b) * reprs(i, b);
        }
    }
    const double z = std::exp(s[0]) + std::exp(s[1]);
    EXPECT_NEAR(got(0, 0), std::exp(s[0]) / z, 1e-12);
    EXPECT_NEAR(got(0, 1), std::exp(s[1]) / z, 1e-12);
    EXPECT_NEAR(match_ocr(tape, tape.constant(uq), tape.constant(reprs.topRows(1)), f.params).scalar(), 1.0, 0.0);
    Matrix twin(2, 4);
    twin << reprs.row(0), reprs.row(0);
    EXPECT_NEAR(match_ocr(tape, tape.constant(uq), tape.constant(twin), f.params).value()(0, 1), 0.5, 1e-15);
    EXPECT_THROW(match_ocr(tape, tape.constant(uq), tape.constant(Matrix(0, 4)), f.params), ShapeError);
}

TEST(Answer, ReasoningWithZeroGruHalvesQuestionState) {
    ad::ParameterStore store;
    Rng rng(33);
    const auto params = MatchParams::create(store, "ans", 2, 2, 2, rng);
    for (auto* p : {params.gru.w_in, params.gru.w_rec, params.gru.b_in, params.gru.b_rec}) p->value.setZero();
    ad::Tape tape;
    Matrix uq(1, 2);
    uq << 0.6, -1.0;
    const Matrix reprs = random_matrix(3, 2, rng);
    const auto p = match_ocr(tape, tape.constant(uq), tape.constant(reprs), params);
    const Matrix t = reasoning_state(tape, tape.constant(uq), p, tape.constant(reprs), params).value();
    EXPECT_NEAR(t(0, 0), 0.3, 1e-15);
    EXPECT_NEAR(t(0, 1), -0.5, 1e-15);
    const auto single = reason_additional(tape, tape.constant(uq), p, tape.constant(reprs),
                                          tape.constant(random_matrix(1, 2, rng)), params);
    EXPECT_EQ(single.scalar(), 1.0);
}

TEST(Answer, SpecialHeads) {
    AnswerFixture f;
    ad::Tape tape;
    const Matrix uq = random_matrix(1, 3, f.rng), one = random_matrix(1, 4, f.rng).cwiseAbs();
    const auto h = special_heads(tape, tape.constant(uq), tape.constant(one), f.params);
    const double want = 1.0 / (1.0 + std::exp(-(one * f.params.v_y->value)(0, 0)));
    EXPECT_NEAR(h.yes.scalar(), want, 1e-14);
    f.params.v_n->value.setZero();
    EXPECT_DOUBLE_EQ(special_heads(tape, tape.constant(uq), tape.constant(one), f.params).no.scalar(), 0.5);
    const auto null = special_heads(tape, tape.constant(uq), ad::Var{}, f.params);
    const double want_null = 1.0 / (1.0 + std::exp(-(f.params.null_repr->value * f.params.v_u->value)(0, 0)));
    EXPECT_NEAR(null.unanswerable.scalar(), want_null, 1e-14);
}

TEST(Answer, Selection) {
    Scores s{{0.9, 0.1}, {}, 0.5, 0.4, 0.3};
    EXPECT_EQ(select_answer(s).pool, CandidateKind::ocr_span);
    EXPECT_EQ(select_answer(s).index, 0u);
    Scores tie{{0.6, 0.4}, {}, 0.6, 0.1, 0.1};
    EXPECT_EQ(select_answer(tie).pool, CandidateKind::ocr_span);
    Scores unans{{0.5, 0.5}, {1.0}, 0.1, 0.1, 0.99};
    EXPECT_EQ(select_answer(unans).pool, CandidateKind::additional);
    unans.p_add.clear();
    EXPECT_EQ(select_answer(unans).pool, CandidateKind::unanswerable);
}

TEST(Answer, SelectionInvariantUnderMonotoneTransform) {
    Rng rng(34);
    for (int t = 0; t < 200; ++t) {
        Scores s;
        for (int i = 0; i < 4; ++i) s.p_ocr.push_back(rng.uniform());
        for (int i = 0; i < 2; ++i) s.p_add.push_back(rng.uniform());
        s.p_yes = rng.uniform();
        s.p_no = rng.uniform();
        s.p_unanswerable = rng.uniform();
        auto f = [](double x) { return std::exp(3 * x) - 7; };
        Scores g = s;
        for (auto& v : g.p_ocr) v = f(v);
        for (auto& v : g.p_add) v = f(v);
        g.p_yes = f(g.p_yes);
        g.p_no = f(g.p_no);
        g.p_unanswerable = f(g.p_unanswerable);
        const auto a = select_answer(s), b = select_answer(g);
        ASSERT_EQ(a.pool, b.pool);
        ASSERT_EQ(a.index, b.index);
    }
}

std::vector<AnswerCandidate> pools(const std::vector<std::string>& spans, const std::vector<std::string>& adds) {
    std::vector<AnswerCandidate> out;
    for (const auto& s : spans) out.push_back({CandidateKind::ocr_span, {}, {}, s, {}, false});
    for (const auto& a : adds) out.push_back({CandidateKind::additional, {}, {}, a, {}, false});
    out.push_back({CandidateKind::yes, {}, {}, "yes", {}, false});
    out.push_back({CandidateKind::no, {}, {}, "no", {}, false});
    out.push_back({CandidateKind::unanswerable, {}, {}, "unanswerable", {}, false});
    return out;
}

TEST(Answer, LabelsAndLoss) {
    const auto l = make_labels(pools({"Stop", "go"}, {}), {"stop "});
    EXPECT_EQ(l.ocr, (std::vector<double>{1, 0}));
    EXPECT_TRUE(l.reachable);
    Scores s{{0.5, 0.5}, {}, 1e-9, 1e-9, 1e-9};
    // the span term alone: -log(0.5) - log(0.5); the specials are clamped near zero
    EXPECT_NEAR(answer_loss(s, l), 2 * std::log(2.0) + 3 * -std::log(1 - 1e-7), 1e-12);
    EXPECT_NEAR(2 * std::log(2.0), 1.386, 1e-3);

    const auto ly = make_labels(pools({"a"}, {"b"}), {"yes"});
    Scores half{{0.5}, {0.5}, 0.5, 0.5, 0.5};
    EXPECT_NEAR(answer_loss(half, ly), 5 * std::log(2.0), 1e-12);
    EXPECT_NEAR(answer_loss(half, ly), 3.466, 1e-3);

    Scores perfect{{1.0}, {0.0}, 0.0, 0.0, 0.0};
    const auto la = make_labels(pools({"a"}, {"b"}), {"a"});
    EXPECT_LT(answer_loss(perfect, la), 1e-6);
    EXPECT_THROW(make_labels(pools({"a"}, {}), {}), std::exception);
}

TEST(Answer, UnreachableKeepsOnlySpecialTerms) {
    const auto l = make_labels(pools({"a", "b"}, {}), {"zzz"});
    EXPECT_FALSE(l.reachable);
    Scores s{{0.9, 0.1}, {}, 0.5, 0.5, 0.5};
    EXPECT_NEAR(answer_loss(s, l), 3 * std::log(2.0), 1e-12);
}

TEST(Answer, TapeLossMatchesValueLoss) {
    AnswerFixture f;
    const auto labels = make_labels(pools({"a", "b", "c"}, {"d", "e"}), {"d"});
    ad::Tape tape;
    const Matrix uq = random_matrix(1, 3, f.rng);
    const auto ocr = tape.constant(random_matrix(3, 4, f.rng).cwiseAbs());
    const auto add = tape.constant(random_matrix(2, 4, f.rng).cwiseAbs());
    const auto p_ocr = match_ocr(tape, tape.constant(uq), ocr, f.params);
    const auto p_add = reason_additional(tape, tape.constant(uq), p_ocr, ocr, add, f.params);
    const auto heads = special_heads(tape, tape.constant(uq), ocr, f.params);
    const double loss = answer_loss(p_ocr, p_add, heads, labels).scalar();
    Scores s;
    for (Index i = 0; i < 3; ++i) s.p_ocr.push_back(p_ocr.value()(0, i));
    for (Index i = 0; i < 2; ++i) s.p_add.push_back(p_add.value()(0, i));
    s.p_yes = heads.yes.scalar();
    s.p_no = heads.no.scalar();
    s.p_unanswerable = heads.unanswerable.scalar();
    EXPECT_NEAR(loss, answer_loss(s, labels), 1e-12);
    EXPECT_GT(loss, 0.0);
}

TEST(Answer, LossGradientOverMatchParams) {
    ad::ParameterStore store;
    Rng rng(35);
    const auto params = MatchParams::create(store, "ans", 2, 3, 4, rng);
    const auto labels = make_labels(pools({"a", "b"}, {"c", "d"}), {"c"});
    const Matrix u = random_matrix(3, 2, rng), uh = random_matrix(3, 2, rng), ua = random_matrix(2, 2, rng);
    EXPECT_LT(gradient_error(
                  [&](ad::Tape& t, const auto& x) {
                      const auto reprs = candidate_reprs(t, t.constant(u), t.constant(uh), {{0}, {1, 2}}, params);
                      const auto add = candidate_reprs(t, t.constant(ua), t.constant(Matrix::Zero(2, 2)), {{0}, {1}},
                                                       params);
                      const auto p_ocr = match_ocr(t, x[0], reprs, params);
                      const auto p_add = reason_additional(t, x[0], p_ocr, reprs, add, params);
                      return answer_loss(p_ocr, p_add, special_heads(t, x[0], reprs, params), labels);
                  },
                  {random_matrix(1, 3, rng)}),
              1e-6);
}

// ---- full model --------------------------------------------------------------------------

struct ModelFixture {
    RunConfig cfg = toy_profile();
    Dataset data = generate_synthetic({8, 16, 3});
    std::vector<QAPair> qa = qa_pairs_from_dataset(data);
    RetrievalIndex index = RetrievalIndex::build(qa);
    TextVqaModel model{cfg.model, Vocabulary(collect_vocabulary(data), OovMode::hash_bucket, 4), 5};
};

TEST(Model, PrepareBuildsAlignedInputs) {
    ModelFixture f;
    const Sample& s = f.data.samples[0];
    const auto extra = f.index.retrieve(s.question, 3, s.sample_id);
    const auto p = f.model.prepare(s, extra);
    const std::size_t n = s.ocr_tokens.size();
    EXPECT_EQ(p.context.size(), n);
    EXPECT_EQ(p.context_rows.size(), n);
    EXPECT_EQ(p.context_positions.rows(), static_cast<Index>(n));
    EXPECT_EQ(p.num_spans, 2 * n - 1);
    EXPECT_EQ(p.candidates.size(), p.num_spans + p.num_additional + 3);
    ASSERT_TRUE(p.labels.has_value());
    EXPECT_TRUE(p.labels->reachable);
    EXPECT_EQ(p.labels->ocr.size(), p.num_spans);
}

TEST(Model, ForwardProducesDistributions) {
    ModelFixture f;
    for (const auto& s : f.data.samples) {
        const auto p = f.model.prepare(s, f.index.retrieve(s.question, 3));
        ad::Tape tape;
        const auto out = f.model.forward(tape, p);
        ASSERT_TRUE(out.p_ocr.valid());
        EXPECT_NEAR(out.p_ocr.value().sum(), 1.0, 1e-12);
        if (out.p_add.valid()) {
            EXPECT_NEAR(out.p_add.value().sum(), 1.0, 1e-12);
        }
        for (const auto& h : {out.heads.yes, out.heads.no, out.heads.unanswerable}) {
            EXPECT_GT(h.scalar(), 0.0);
            EXPECT_LT(h.scalar(), 1.0);
        }
        EXPECT_GE(out.loss.scalar(), 0.0);
        for (auto id : tape.softmax_nodes()) {
            const Matrix& w = tape.value(id);
            for (Index r = 0; r < w.rows(); ++r) EXPECT_NEAR(w.row(r).sum(), 1.0, 1e-9);
        }
    }
}

TEST(Model, NoOcrAndNoObjects) {
    ModelFixture f;
    Sample s = f.data.samples[0];
    s.ocr_tokens.clear();
    s.objects.clear();
    const auto p = f.model.prepare(s, {"paris"});
    EXPECT_EQ(p.num_spans, 0u);
    EXPECT_EQ(p.num_additional, 1u);
    const auto scores = f.model.score(p);
    EXPECT_TRUE(scores.p_ocr.empty());
    ASSERT_EQ(scores.p_add.size(), 1u);
    EXPECT_DOUBLE_EQ(scores.p_add[0], 1.0);
    const auto pred = f.model.predict(p);
    EXPECT_EQ(pred.sample_id, s.sample_id);
    EXPECT_FALSE(pred.answer.empty());
}

TEST(Model, PredictAnswerIsCandidateText) {
    ModelFixture f;
    const auto p = f.model.prepare(f.data.samples[1]);
    const auto pred = f.model.predict(p);
    const bool found = std::any_of(p.candidates.begin(), p.candidates.end(),
                                   [&](const AnswerCandidate& c) { return c.text == pred.answer; });
    EXPECT_TRUE(found);
    EXPECT_EQ(pred.p_ocr.size(), p.num_spans);
}

TEST(Model, DictionaryMode) {
    ModelFixture f;
    f.cfg.model.dictionary_mode = true;
    TextVqaModel model(f.cfg.model, f.model.vocab(), 5);
    Sample s = f.data.samples[0];
    EXPECT_THROW(model.prepare(s), std::exception);
    s.dictionary = std::vector<std::string>{"coca cola", s.gold_answers[0], "zebra"};
    const auto p = model.prepare(s);
    EXPECT_EQ(p.num_spans, 3u);
    EXPECT_TRUE(p.context_positions.isZero());
    EXPECT_EQ(model.score(p).p_ocr.size(), 3u);
}

TEST(Model, SeedDeterminesParameters) {
    ModelFixture f;
    TextVqaModel a(f.cfg.model, f.model.vocab(), 9), b(f.cfg.model, f.model.vocab(), 9), c(f.cfg.model, f.model.vocab(), 10);
    auto ia = a.parameters().begin(), ib = b.parameters().begin(), ic = c.parameters().begin();
    bool any_diff = false;
    for (; ia != a.parameters().end(); ++ia, ++ib, ++ic) {
        EXPECT_EQ(ia->name, ib->name);
        EXPECT_EQ(ia->value, ib->value);
        any_diff = any_diff || ia->value != ic->value;
    }
    EXPECT_TRUE(any_diff);
}

}  // namespace
}  // namespace textvqa
