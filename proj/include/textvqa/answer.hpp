#pragma once

// Answer prediction.
//   u^A_i  = ReLU(FC([u^O_span; û^O_span]))
//   P^A    = softmax_i(u^Q W_A u^A_i)
//   t^Q    = GRU(u^Q, Σ_i P^A_i u^A_i)
//   P^AA   = softmax_j(t^Q W_AA u^AA_j)
//   P_Y    = σ((Σ_i softmax_i(u^Q W_Y u^A_i) u^A_i) · w_Y), likewise P_N and P_U
// The loss is summed binary cross entropy over every scored probability.

#include "textvqa/autodiff.hpp"
#include "textvqa/encoders.hpp"
#include "textvqa/recurrent.hpp"
#include "textvqa/rng.hpp"
#include "textvqa/textprep.hpp"

#include <array>
#include <string>
#include <vector>

namespace textvqa {

struct MatchParams {
    ad::Parameter* fc_w = nullptr;  // 2 d_u x d_a
    ad::Parameter* fc_b = nullptr;  // 1 x d_a
    ad::Parameter* w_a = nullptr;   // d_q x d_a
    ad::Parameter* w_aa = nullptr;
    ad::Parameter* w_y = nullptr;
    ad::Parameter* w_n = nullptr;
    ad::Parameter* w_u = nullptr;
    ad::Parameter* v_y = nullptr;  // d_a x 1
    ad::Parameter* v_n = nullptr;
    ad::Parameter* v_u = nullptr;
    ad::Parameter* null_repr = nullptr;  // 1 x d_a, stands in when there are no OCR candidates
    GruCell gru;                         // input d_a, state d_q

    static MatchParams create(ad::ParameterStore& store, const std::string& name, int d_u, int d_q, int d_a, Rng& rng);
};

/// Rows of span representations: row g pools `groups[g]` positions of u and û.
ad::Var candidate_reprs(ad::Tape& tape, const ad::Var& u, const ad::Var& u_hat,
                        const std::vector<std::vector<std::size_t>>& groups, const MatchParams& params,
                        Pooling pooling = Pooling::sum);
/// One representation from already pooled 1 x d_u vectors.
ad::Var candidate_repr(ad::Tape& tape, const ad::Var& u_span, const ad::Var& u_hat_span, const MatchParams& params);

/// 1 x c probabilities.
ad::Var match_ocr(ad::Tape& tape, const ad::Var& u_q, const ad::Var& reprs, const MatchParams& params);
/// t^Q, 1 x d_q.
ad::Var reasoning_state(ad::Tape& tape, const ad::Var& u_q, const ad::Var& p_ocr, const ad::Var& ocr_reprs,
                        const MatchParams& params);
/// 1 x a probabilities.
ad::Var reason_additional(ad::Tape& tape, const ad::Var& u_q, const ad::Var& p_ocr, const ad::Var& ocr_reprs,
                          const ad::Var& additional_reprs, const MatchParams& params);

struct SpecialHeads {
    ad::Var yes;
    ad::Var no;
    ad::Var unanswerable;
};

/// 1x1 probabilities; an empty `ocr_reprs` falls back to the null representation.
SpecialHeads special_heads(ad::Tape& tape, const ad::Var& u_q, const ad::Var& ocr_reprs, const MatchParams& params);

struct Scores {
    std::vector<double> p_ocr;
    std::vector<double> p_add;
    double p_yes = 0.0;
    double p_no = 0.0;
    double p_unanswerable = 0.0;
};

struct Selection {
    CandidateKind pool = CandidateKind::ocr_span;
    std::size_t index = 0;  // within its pool
    double score = 0.0;
};

/// Argmax over all pools; ties go to the earlier pool (ocr_span, additional,
/// yes, no, unanswerable), then to the lower index.
Selection select_answer(const Scores& scores);

/// 0/1 targets aligned with Scores.
struct Labels {
    std::vector<double> ocr;
    std::vector<double> add;
    std::array<double, 3> special{};  // yes, no, unanswerable
    bool reachable = false;
};

/// `candidates` holds spans, then additional texts, then specials, as built by
/// generate_candidates. A span/additional candidate is positive iff its
/// normalized text equals some normalized gold answer.
Labels make_labels(const std::vector<AnswerCandidate>& candidates, const std::vector<std::string>& gold_answers);

/// Summed BCE. An unreachable sample keeps only the special-head terms.
ad::Var answer_loss(const ad::Var& p_ocr, const ad::Var& p_add, const SpecialHeads& heads,
                    const Labels& labels, double eps = 1e-7);

/// The same loss on plain scores.
double answer_loss(const Scores& scores, const Labels& labels, double eps = 1e-7);

}  // namespace textvqa
