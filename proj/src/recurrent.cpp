#include "textvqa/recurrent.hpp"

#include "textvqa/error.hpp"

#include <cmath>

namespace textvqa {

Matrix uniform_matrix(Index rows, Index cols, double bound, Rng& rng) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-bound, bound);
    }
    return m;
}

Matrix normal_matrix(Index rows, Index cols, double stddev, Rng& rng) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal(0.0, stddev);
    }
    return m;
}

LstmParams LstmParams::create(ad::ParameterStore& store, const std::string& name, int input_dim, int hidden,
                              Rng& rng) {
    if (input_dim < 1 || hidden < 1) throw ShapeError("lstm " + name + ": dims must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    LstmParams p;
    p.hidden = hidden;
    p.w_in = &store.add(name + ".w_in", uniform_matrix(input_dim, 4 * hidden, bound, rng));
    p.w_rec = &store.add(name + ".w_rec", uniform_matrix(hidden, 4 * hidden, bound, rng));
    Matrix b = Matrix::Zero(1, 4 * hidden);
    b.middleCols(hidden, hidden).setOnes();  // forget gate starts open
    p.bias = &store.add(name + ".bias", std::move(b));
    return p;
}

ad::Var lstm_forward(ad::Tape& tape, const ad::Var& x, const LstmParams& p, bool reverse) {
    const Index steps = x.rows();
    if (steps == 0) throw ShapeError("lstm: empty sequence");
    if (x.cols() != p.input_dim()) throw ShapeError("lstm: input width does not match parameters");
    const Index h = p.hidden;
    const ad::Var w_rec = tape.param(*p.w_rec);
    const ad::Var projected = ad::add_row(ad::matmul(x, tape.param(*p.w_in)), tape.param(*p.bias));

    std::vector<ad::Var> outputs(static_cast<std::size_t>(steps));
    ad::Var hidden;
    ad::Var cell;
    for (Index k = 0; k < steps; ++k) {
        const Index t = reverse ? steps - 1 - k : k;
        ad::Var gates = ad::slice_rows(projected, t, 1);
        if (hidden.valid()) gates = ad::add(gates, ad::matmul(hidden, w_rec));
        const ad::Var i = ad::sigmoid(ad::slice_cols(gates, 0, h));
        const ad::Var f = ad::sigmoid(ad::slice_cols(gates, h, h));
        const ad::Var g = ad::tanh(ad::slice_cols(gates, 2 * h, h));
        const ad::Var o = ad::sigmoid(ad::slice_cols(gates, 3 * h, h));
        cell = cell.valid() ? ad::add(ad::mul(f, cell), ad::mul(i, g)) : ad::mul(i, g);
        hidden = ad::mul(o, ad::tanh(cell));
        outputs[static_cast<std::size_t>(t)] = hidden;
    }
    return ad::concat_rows(outputs);
}

BiLstmLayer BiLstmLayer::create(ad::ParameterStore& store, const std::string& name, int input_dim, int hidden,
                                Rng& rng) {
    BiLstmLayer l;
    l.forward = LstmParams::create(store, name + ".fwd", input_dim, hidden, rng);
    l.backward = LstmParams::create(store, name + ".bwd", input_dim, hidden, rng);
    return l;
}

ad::Var BiLstmLayer::apply(ad::Tape& tape, const ad::Var& x) const {
    const ad::Var parts[] = {lstm_forward(tape, x, forward, false), lstm_forward(tape, x, backward, true)};
    return ad::concat_cols(parts);
}

namespace {

Matrix sigmoid(const Matrix& m) {
    return m.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

// Runs one direction over a padded batch. Sequence b occupies time steps
// [0, len_b); in reverse mode each sequence starts from its own last row.
std::vector<Matrix> run_direction(const LstmParams& p, const std::vector<Matrix>& seqs, bool reverse) {
    const Index batch = static_cast<Index>(seqs.size());
    const Index h = p.hidden;
    Index max_len = 0;
    for (const auto& s : seqs) max_len = std::max(max_len, s.rows());

    Matrix state = Matrix::Zero(batch, h);
    Matrix cell = Matrix::Zero(batch, h);
    std::vector<Matrix> out;
    for (const auto& s : seqs) out.emplace_back(s.rows(), h);

    const Matrix& w_in = p.w_in->value;
    const Matrix& w_rec = p.w_rec->value;
    const Matrix& bias = p.bias->value;
    Matrix inputs = Matrix::Zero(batch, w_in.rows());
    for (Index k = 0; k < max_len; ++k) {
        Eigen::Array<bool, Eigen::Dynamic, 1> active(batch);
        for (Index b = 0; b < batch; ++b) {
            const Index len = seqs[static_cast<std::size_t>(b)].rows();
            active(b) = k < len;
            if (active(b)) {
                const Index t = reverse ? len - 1 - k : k;
                inputs.row(b) = seqs[static_cast<std::size_t>(b)].row(t);
            } else {
                inputs.row(b).setZero();
            }
        }
        const Matrix gates = (inputs * w_in + state * w_rec).rowwise() + bias.row(0);
        const Matrix i = sigmoid(gates.middleCols(0, h));
        const Matrix f = sigmoid(gates.middleCols(h, h));
        const Matrix g = gates.middleCols(2 * h, h).array().tanh().matrix();
        const Matrix o = sigmoid(gates.middleCols(3 * h, h));
        const Matrix next_cell = f.cwiseProduct(cell) + i.cwiseProduct(g);
        const Matrix next_state = o.cwiseProduct(next_cell.array().tanh().matrix());
        for (Index b = 0; b < batch; ++b) {
            if (!active(b)) continue;
            cell.row(b) = next_cell.row(b);
            state.row(b) = next_state.row(b);
            const Index len = seqs[static_cast<std::size_t>(b)].rows();
            const Index t = reverse ? len - 1 - k : k;
            out[static_cast<std::size_t>(b)].row(t) = state.row(b);
        }
    }
    return out;
}

}  // namespace

std::vector<Matrix> bilstm_infer_batch(const BiLstmLayer& layer, const std::vector<Matrix>& sequences) {
    for (const auto& s : sequences) {
        if (s.rows() == 0) throw ShapeError("bilstm batch: empty sequence");
        if (s.cols() != layer.input_dim()) throw ShapeError("bilstm batch: input width mismatch");
    }
    const auto fwd = run_direction(layer.forward, sequences, false);
    const auto bwd = run_direction(layer.backward, sequences, true);
    std::vector<Matrix> out;
    for (std::size_t b = 0; b < sequences.size(); ++b) {
        Matrix m(fwd[b].rows(), fwd[b].cols() + bwd[b].cols());
        m << fwd[b], bwd[b];
        out.push_back(std::move(m));
    }
    return out;
}

GruCell GruCell::create(ad::ParameterStore& store, const std::string& name, int input_dim, int hidden, Rng& rng) {
    if (input_dim < 1 || hidden < 1) throw ShapeError("gru " + name + ": dims must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    GruCell c;
    c.hidden = hidden;
    c.w_in = &store.add(name + ".w_in", uniform_matrix(input_dim, 3 * hidden, bound, rng));
    c.w_rec = &store.add(name + ".w_rec", uniform_matrix(hidden, 3 * hidden, bound, rng));
    c.b_in = &store.add(name + ".b_in", uniform_matrix(1, 3 * hidden, bound, rng));
    c.b_rec = &store.add(name + ".b_rec", uniform_matrix(1, 3 * hidden, bound, rng));
    return c;
}

ad::Var GruCell::step(ad::Tape& tape, const ad::Var& h, const ad::Var& x) const {
    if (h.rows() != 1 || h.cols() != hidden) throw ShapeError("gru: state must be 1 x hidden");
    const Index n = hidden;
    const ad::Var gi = ad::add_row(ad::matmul(x, tape.param(*w_in)), tape.param(*b_in));
    const ad::Var gh = ad::add_row(ad::matmul(h, tape.param(*w_rec)), tape.param(*b_rec));
    const ad::Var r = ad::sigmoid(ad::add(ad::slice_cols(gi, 0, n), ad::slice_cols(gh, 0, n)));
    const ad::Var z = ad::sigmoid(ad::add(ad::slice_cols(gi, n, n), ad::slice_cols(gh, n, n)));
    const ad::Var cand = ad::tanh(ad::add(ad::slice_cols(gi, 2 * n, n), ad::mul(r, ad::slice_cols(gh, 2 * n, n))));
    return ad::add(ad::mul(ad::one_minus(z), cand), ad::mul(z, h));
}

}  // namespace textvqa
