#include "textvqa/answer.hpp"

#include "textvqa/error.hpp"
#include "textvqa/text.hpp"

#include <algorithm>
#include <cmath>

namespace textvqa {

MatchParams MatchParams::create(ad::ParameterStore& store, const std::string& name, int d_u, int d_q, int d_a,
                                Rng& rng) {
    if (d_u < 1 || d_q < 1 || d_a < 1) throw ShapeError("answer " + name + ": dims must be positive");
    MatchParams p;
    const double fc_bound = 1.0 / std::sqrt(2.0 * d_u);
    const double bil_bound = 1.0 / std::sqrt(static_cast<double>(d_q));
    const double head_bound = 1.0 / std::sqrt(static_cast<double>(d_a));
    p.fc_w = &store.add(name + ".fc.w", uniform_matrix(2 * d_u, d_a, fc_bound, rng));
    p.fc_b = &store.add(name + ".fc.b", uniform_matrix(1, d_a, fc_bound, rng));
    p.w_a = &store.add(name + ".W_A", uniform_matrix(d_q, d_a, bil_bound, rng));
    p.w_aa = &store.add(name + ".W_AA", uniform_matrix(d_q, d_a, bil_bound, rng));
    p.w_y = &store.add(name + ".W_Y", uniform_matrix(d_q, d_a, bil_bound, rng));
    p.w_n = &store.add(name + ".W_N", uniform_matrix(d_q, d_a, bil_bound, rng));
    p.w_u = &store.add(name + ".W_U", uniform_matrix(d_q, d_a, bil_bound, rng));
    p.v_y = &store.add(name + ".w_Y", uniform_matrix(d_a, 1, head_bound, rng));
    p.v_n = &store.add(name + ".w_N", uniform_matrix(d_a, 1, head_bound, rng));
    p.v_u = &store.add(name + ".w_U", uniform_matrix(d_a, 1, head_bound, rng));
    p.null_repr = &store.add(name + ".null", uniform_matrix(1, d_a, head_bound, rng));
    p.gru = GruCell::create(store, name + ".gru", d_a, d_q, rng);
    return p;
}

ad::Var candidate_repr(ad::Tape& tape, const ad::Var& u_span, const ad::Var& u_hat_span, const MatchParams& params) {
    if (u_span.cols() != u_hat_span.cols() || u_span.rows() != u_hat_span.rows()) {
        throw ShapeError("candidate_repr: u and u_hat differ in shape");
    }
    const ad::Var parts[] = {u_span, u_hat_span};
    const ad::Var joined = ad::concat_cols(parts);
    if (joined.cols() != params.fc_w->value.rows()) throw ShapeError("candidate_repr: FC input width mismatch");
    return ad::relu(ad::add_row(ad::matmul(joined, tape.param(*params.fc_w)), tape.param(*params.fc_b)));
}

ad::Var candidate_reprs(ad::Tape& tape, const ad::Var& u, const ad::Var& u_hat,
                        const std::vector<std::vector<std::size_t>>& groups, const MatchParams& params,
                        Pooling pooling) {
    const ad::Var pool = tape.constant(pooling_matrix(groups, static_cast<std::size_t>(u.rows()), pooling));
    return candidate_repr(tape, ad::matmul(pool, u), ad::matmul(pool, u_hat), params);
}

namespace {

/// softmax over candidates of state W rows^T, as a 1 x c row.
ad::Var bilinear_softmax(ad::Tape& tape, const ad::Var& state, ad::Parameter& w, const ad::Var& rows) {
    if (rows.rows() == 0) throw ShapeError("no candidates to score");
    if (state.cols() != w.value.rows() || rows.cols() != w.value.cols()) {
        throw ShapeError("bilinear score: shape mismatch for " + w.name);
    }
    return ad::softmax_rows(ad::matmul(ad::matmul(state, tape.param(w)), ad::transpose(rows)));
}

}  // namespace

ad::Var match_ocr(ad::Tape& tape, const ad::Var& u_q, const ad::Var& reprs, const MatchParams& params) {
    return bilinear_softmax(tape, u_q, *params.w_a, reprs);
}

ad::Var reasoning_state(ad::Tape& tape, const ad::Var& u_q, const ad::Var& p_ocr, const ad::Var& ocr_reprs,
                        const MatchParams& params) {
    if (p_ocr.cols() != ocr_reprs.rows()) throw ShapeError("reasoning_state: probabilities and reprs differ");
    return params.gru.step(tape, u_q, ad::matmul(p_ocr, ocr_reprs));
}

ad::Var reason_additional(ad::Tape& tape, const ad::Var& u_q, const ad::Var& p_ocr, const ad::Var& ocr_reprs,
                          const ad::Var& additional_reprs, const MatchParams& params) {
    const ad::Var t_q = reasoning_state(tape, u_q, p_ocr, ocr_reprs, params);
    return bilinear_softmax(tape, t_q, *params.w_aa, additional_reprs);
}

SpecialHeads special_heads(ad::Tape& tape, const ad::Var& u_q, const ad::Var& ocr_reprs, const MatchParams& params) {
    const ad::Var reprs = (ocr_reprs.valid() && ocr_reprs.rows() > 0) ? ocr_reprs : tape.param(*params.null_repr);
    auto head = [&](ad::Parameter& w, ad::Parameter& v) {
        const ad::Var weights = bilinear_softmax(tape, u_q, w, reprs);
        return ad::sigmoid(ad::matmul(ad::matmul(weights, reprs), tape.param(v)));
    };
    return {head(*params.w_y, *params.v_y), head(*params.w_n, *params.v_n), head(*params.w_u, *params.v_u)};
}

Selection select_answer(const Scores& scores) {
    Selection best;
    bool found = false;
    auto offer = [&](CandidateKind pool, std::size_t index, double score) {
        if (!found || score > best.score) {
            best = {pool, index, score};
            found = true;
        }
    };
    for (std::size_t i = 0; i < scores.p_ocr.size(); ++i) offer(CandidateKind::ocr_span, i, scores.p_ocr[i]);
    for (std::size_t i = 0; i < scores.p_add.size(); ++i) offer(CandidateKind::additional, i, scores.p_add[i]);
    offer(CandidateKind::yes, 0, scores.p_yes);
    offer(CandidateKind::no, 0, scores.p_no);
    offer(CandidateKind::unanswerable, 0, scores.p_unanswerable);
    return best;
}

Labels make_labels(const std::vector<AnswerCandidate>& candidates, const std::vector<std::string>& gold_answers) {
    if (gold_answers.empty()) throw ValidationError("answers", "training sample has no gold answers");
    std::vector<std::string> gold;
    for (const auto& g : gold_answers) gold.push_back(normalize_answer(g));
    auto is_gold = [&](const std::string& text) {
        return std::find(gold.begin(), gold.end(), normalize_answer(text)) != gold.end();
    };

    Labels l;
    for (const auto& c : candidates) {
        switch (c.kind) {
            case CandidateKind::ocr_span: l.ocr.push_back(is_gold(c.text) ? 1.0 : 0.0); break;
            case CandidateKind::additional: l.add.push_back(is_gold(c.text) ? 1.0 : 0.0); break;
            case CandidateKind::yes: l.special[0] = is_gold("yes") ? 1.0 : 0.0; break;
            case CandidateKind::no: l.special[1] = is_gold("no") ? 1.0 : 0.0; break;
            case CandidateKind::unanswerable: l.special[2] = is_gold("unanswerable") ? 1.0 : 0.0; break;
        }
    }
    l.reachable = std::any_of(l.ocr.begin(), l.ocr.end(), [](double v) { return v > 0.0; }) ||
                  std::any_of(l.add.begin(), l.add.end(), [](double v) { return v > 0.0; }) ||
                  std::any_of(l.special.begin(), l.special.end(), [](double v) { return v > 0.0; });
    return l;
}

namespace {

Matrix row_of(const std::vector<double>& v) {
    Matrix m(1, static_cast<Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) m(0, static_cast<Index>(i)) = v[i];
    return m;
}

}  // namespace

ad::Var answer_loss(const ad::Var& p_ocr, const ad::Var& p_add, const SpecialHeads& heads,
                    const Labels& labels, double eps) {
    std::vector<ad::Var> probs;
    std::vector<double> targets;
    if (labels.reachable) {
        if (!labels.ocr.empty()) {
            if (!p_ocr.valid() || static_cast<std::size_t>(p_ocr.cols()) != labels.ocr.size()) {
                throw ShapeError("answer_loss: OCR labels do not match probabilities");
            }
            probs.push_back(p_ocr);
            targets.insert(targets.end(), labels.ocr.begin(), labels.ocr.end());
        }
        if (!labels.add.empty()) {
            if (!p_add.valid() || static_cast<std::size_t>(p_add.cols()) != labels.add.size()) {
                throw ShapeError("answer_loss: additional labels do not match probabilities");
            }
            probs.push_back(p_add);
            targets.insert(targets.end(), labels.add.begin(), labels.add.end());
        }
    }
    probs.insert(probs.end(), {heads.yes, heads.no, heads.unanswerable});
    targets.insert(targets.end(), labels.special.begin(), labels.special.end());
    return ad::bce_sum(ad::concat_cols(probs), row_of(targets), eps);
}

double answer_loss(const Scores& scores, const Labels& labels, double eps) {
    auto term = [eps](double p, double y) {
        const double c = std::clamp(p, eps, 1.0 - eps);
        return -(y * std::log(c) + (1.0 - y) * std::log(1.0 - c));
    };
    double total = 0.0;
    if (labels.reachable) {
        if (scores.p_ocr.size() != labels.ocr.size() || scores.p_add.size() != labels.add.size()) {
            throw ShapeError("answer_loss: labels do not match scores");
        }
        for (std::size_t i = 0; i < labels.ocr.size(); ++i) total += term(scores.p_ocr[i], labels.ocr[i]);
        for (std::size_t i = 0; i < labels.add.size(); ++i) total += term(scores.p_add[i], labels.add[i]);
    }
    total += term(scores.p_yes, labels.special[0]);
    total += term(scores.p_no, labels.special[1]);
    total += term(scores.p_unanswerable, labels.special[2]);
    return total;
}

}  // namespace textvqa
