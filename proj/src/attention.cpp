#include "textvqa/attention.hpp"

#include "textvqa/error.hpp"
#include "textvqa/recurrent.hpp"

#include <cmath>

namespace textvqa {

AttnLayer AttnLayer::create(ad::ParameterStore& store, const std::string& name, int input_dim, int hidden, Rng& rng) {
    if (input_dim < 1 || hidden < 1) throw ShapeError("attention " + name + ": dims must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
    AttnLayer l;
    l.U = &store.add(name + ".U", uniform_matrix(input_dim, hidden, bound, rng));
    l.D = &store.add(name + ".D", Matrix::Ones(1, hidden));
    return l;
}

ad::Var AttnLayer::apply(ad::Tape& tape, const ad::Var& a, const ad::Var& b, const ad::Var& c) const {
    return attn(a, b, c, tape.param(*U), tape.param(*D));
}

ad::Var AttnLayer::weights(ad::Tape& tape, const ad::Var& a, const ad::Var& b) const {
    return attention_weights(a, b, tape.param(*U), tape.param(*D));
}

ad::Var attention_weights(const ad::Var& a, const ad::Var& b, const ad::Var& u, const ad::Var& d) {
    if (b.rows() == 0) throw ShapeError("attention: no keys");
    if (a.cols() != b.cols()) throw ShapeError("attention: query and key widths differ");
    if (a.cols() != u.rows()) throw ShapeError("attention: U does not match the input width");
    if (d.rows() != 1 || d.cols() != u.cols()) throw ShapeError("attention: D must be 1 x k");
    const ad::Var qa = ad::relu(ad::matmul(a, u));
    const ad::Var kb = ad::relu(ad::matmul(b, u));
    const ad::Var scores = ad::matmul(ad::mul_row(qa, d), ad::transpose(kb));
    return ad::softmax_rows(scores);
}

ad::Var attn(const ad::Var& a, const ad::Var& b, const ad::Var& c, const ad::Var& u, const ad::Var& d) {
    if (b.rows() != c.rows()) throw ShapeError("attention: keys and values differ in count");
    return ad::matmul(attention_weights(a, b, u, d), c);
}

ad::Var condense(const ad::Var& h, const ad::Var& w) {
    if (h.rows() == 0) throw ShapeError("condense: empty input");
    if (w.rows() != h.cols() || w.cols() != 1) throw ShapeError("condense: w must be d x 1");
    const ad::Var beta = ad::softmax_rows(ad::transpose(ad::matmul(h, w)));
    return ad::matmul(beta, h);
}

Matrix attention_weights(const Matrix& a, const Matrix& b, const AttnParams& params) {
    ad::Tape tape;
    return attention_weights(tape.constant(a), tape.constant(b), tape.constant(params.U), tape.constant(params.D))
        .value();
}

Matrix attn(const Matrix& a, const Matrix& b, const Matrix& c, const AttnParams& params) {
    ad::Tape tape;
    return attn(tape.constant(a), tape.constant(b), tape.constant(c), tape.constant(params.U),
                tape.constant(params.D))
        .value();
}

Matrix self_attention(const Matrix& h, const AttnParams& params) {
    if (h.rows() == 0) throw ShapeError("self_attention: empty input");
    return attn(h, h, h, params);
}

Matrix condense(const Matrix& h, const Matrix& w) {
    ad::Tape tape;
    return condense(tape.constant(h), tape.constant(w)).value();
}

}  // namespace textvqa
