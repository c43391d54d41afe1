#pragma once

// Attn(A, B, C): weights from A against B with the diagonal-bilinear score
//   s_ij = ReLU(U^T a_i) . diag(D) . ReLU(U^T b_j),  alpha_i = softmax_j(s_i.)
// mixing the rows of C. Self-attention is Attn(H, H, H); condensation pools
// rows with softmax(H w).

#include "textvqa/autodiff.hpp"
#include "textvqa/rng.hpp"

#include <string>

namespace textvqa {

/// Plain-value attention parameters. U is d x k, D holds the diagonal as 1 x k.
struct AttnParams {
    Matrix U;
    Matrix D;

    int input_dim() const { return static_cast<int>(U.rows()); }
    int hidden() const { return static_cast<int>(U.cols()); }
};

/// Attention parameters registered in a ParameterStore.
struct AttnLayer {
    ad::Parameter* U = nullptr;
    ad::Parameter* D = nullptr;

    static AttnLayer create(ad::ParameterStore& store, const std::string& name, int input_dim, int hidden, Rng& rng);

    AttnParams values() const { return {U->value, D->value}; }

    ad::Var apply(ad::Tape& tape, const ad::Var& a, const ad::Var& b, const ad::Var& c) const;
    ad::Var weights(ad::Tape& tape, const ad::Var& a, const ad::Var& b) const;
};

// ---- tape versions -----------------------------------------------------------

/// m x n attention weights of A (m x d) against B (n x d).
ad::Var attention_weights(const ad::Var& a, const ad::Var& b, const ad::Var& u, const ad::Var& d);
/// m x e mixture of C's rows.
ad::Var attn(const ad::Var& a, const ad::Var& b, const ad::Var& c, const ad::Var& u, const ad::Var& d);
/// 1 x d softmax(H w)-weighted sum of H's rows; w is d x 1.
ad::Var condense(const ad::Var& h, const ad::Var& w);

// ---- value versions ----------------------------------------------------------

Matrix attention_weights(const Matrix& a, const Matrix& b, const AttnParams& params);
Matrix attn(const Matrix& a, const Matrix& b, const Matrix& c, const AttnParams& params);
Matrix self_attention(const Matrix& h, const AttnParams& params);
/// Returns a 1 x d row.
Matrix condense(const Matrix& h, const Matrix& w);

}  // namespace textvqa
