#pragma once

// LSTM / BiLSTM layers and a GRU cell on the autodiff tape, plus a padded
// batch inference path for BiLSTM layers that runs on plain matrices.

#include "textvqa/autodiff.hpp"
#include "textvqa/rng.hpp"

#include <string>
#include <vector>

namespace textvqa {

/// Gate blocks are laid out [input | forget | cell | output] along columns.
struct LstmParams {
    ad::Parameter* w_in = nullptr;   // in x 4H
    ad::Parameter* w_rec = nullptr;  // H x 4H
    ad::Parameter* bias = nullptr;   // 1 x 4H
    int hidden = 0;

    static LstmParams create(ad::ParameterStore& store, const std::string& name, int input_dim, int hidden, Rng& rng);
    int input_dim() const { return static_cast<int>(w_in->value.rows()); }
};

/// One direction over the rows of x (T x in); returns T x H with row t the
/// hidden state at time t (reverse runs from the last row to the first).
ad::Var lstm_forward(ad::Tape& tape, const ad::Var& x, const LstmParams& p, bool reverse);

struct BiLstmLayer {
    LstmParams forward;
    LstmParams backward;

    /// `hidden` is per direction; the output is 2 * hidden wide.
    static BiLstmLayer create(ad::ParameterStore& store, const std::string& name, int input_dim, int hidden, Rng& rng);

    int input_dim() const { return forward.input_dim(); }
    int output_dim() const { return forward.hidden + backward.hidden; }

    ad::Var apply(ad::Tape& tape, const ad::Var& x) const;
};

/// Padded, masked batch evaluation: every sequence is advanced in lockstep as
/// one row of a [batch x H] state; finished/not-yet-started rows keep their state.
std::vector<Matrix> bilstm_infer_batch(const BiLstmLayer& layer, const std::vector<Matrix>& sequences);

/// GRU cell with gate blocks [reset | update | new]:
///   r = s(x Wir + bir + h Whr + bhr), z = s(x Wiz + biz + h Whz + bhz)
///   n = tanh(x Win + bin + r * (h Whn + bhn)), h' = (1 - z) * n + z * h
struct GruCell {
    ad::Parameter* w_in = nullptr;   // in x 3H
    ad::Parameter* w_rec = nullptr;  // H x 3H
    ad::Parameter* b_in = nullptr;   // 1 x 3H
    ad::Parameter* b_rec = nullptr;  // 1 x 3H
    int hidden = 0;

    static GruCell create(ad::ParameterStore& store, const std::string& name, int input_dim, int hidden, Rng& rng);

    ad::Var step(ad::Tape& tape, const ad::Var& h, const ad::Var& x) const;
};

/// Uniform(-bound, bound) matrix.
Matrix uniform_matrix(Index rows, Index cols, double bound, Rng& rng);
Matrix normal_matrix(Index rows, Index cols, double stddev, Rng& rng);

}  // namespace textvqa
