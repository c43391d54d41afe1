#pragma once

#include "textvqa/autodiff.hpp"
#include "textvqa/corpus.hpp"
#include "textvqa/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace textvqa::testing {

inline Matrix random_matrix(Index rows, Index cols, Rng& rng, double scale = 1.0) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-scale, scale);
    }
    return m;
}

/// Loop-by-loop attention: s_ij = sum_k D_k relu(a_i.U_k) relu(b_j.U_k), softmax over j, mix C.
inline Matrix brute_attention_weights(const Matrix& a, const Matrix& b, const Matrix& u, const Matrix& d) {
    Matrix w(a.rows(), b.rows());
    for (Index i = 0; i < a.rows(); ++i) {
        std::vector<double> s(static_cast<std::size_t>(b.rows()));
        for (Index j = 0; j < b.rows(); ++j) {
            double acc = 0.0;
            for (Index k = 0; k < u.cols(); ++k) {
                double pa = 0.0, pb = 0.0;
                for (Index t = 0; t < u.rows(); ++t) {
                    pa += a(i, t) * u(t, k);
                    pb += b(j, t) * u(t, k);
                }
                acc += std::max(pa, 0.0) * d(0, k) * std::max(pb, 0.0);
            }
            s[static_cast<std::size_t>(j)] = acc;
        }
        const double mx = *std::max_element(s.begin(), s.end());
        double z = 0.0;
        for (double& v : s) z += (v = std::exp(v - mx));
        for (Index j = 0; j < b.rows(); ++j) w(i, j) = s[static_cast<std::size_t>(j)] / z;
    }
    return w;
}

inline Matrix brute_attention(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& u, const Matrix& d) {
    const Matrix w = brute_attention_weights(a, b, u, d);
    Matrix out = Matrix::Zero(a.rows(), c.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < b.rows(); ++j) {
            for (Index e = 0; e < c.cols(); ++e) out(i, e) += w(i, j) * c(j, e);
        }
    }
    return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

/// Largest relative error between tape gradients and central differences of a
/// scalar function of several inputs.
using ScalarFn = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

inline double gradient_error(const ScalarFn& f, std::vector<Matrix> inputs, double step = 1e-5,
                             double floor = 1e-6) {
    std::vector<Matrix> analytic;
    {
        ad::ParameterStore store;
        std::vector<ad::Parameter*> ps;
        for (std::size_t i = 0; i < inputs.size(); ++i) ps.push_back(&store.add("x" + std::to_string(i), inputs[i]));
        ad::Tape tape;
        std::vector<ad::Var> vars;
        for (auto* p : ps) vars.push_back(tape.param(*p));
        tape.backward(f(tape, vars));
        for (auto* p : ps) analytic.push_back(p->grad);
    }
    auto eval = [&](const std::vector<Matrix>& xs) {
        ad::Tape tape;
        std::vector<ad::Var> vars;
        for (const auto& x : xs) vars.push_back(tape.constant(x));
        return f(tape, vars).scalar();
    };
    double worst = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        for (Index e = 0; e < inputs[i].size(); ++e) {
            const double saved = inputs[i].data()[e];
            inputs[i].data()[e] = saved + step;
            const double up = eval(inputs);
            inputs[i].data()[e] = saved - step;
            const double down = eval(inputs);
            inputs[i].data()[e] = saved;
            const double numeric = (up - down) / (2 * step);
            const double a = analytic[i].data()[e];
            worst = std::max(worst, std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor}));
        }
    }
    return worst;
}

// Memoized recursion over prefixes; deliberately not the iterative table.
inline std::size_t oracle_distance(const std::string& a, const std::string& b) {
    std::vector<std::vector<long>> memo(a.size() + 1, std::vector<long>(b.size() + 1, -1));
    std::function<long(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> long {
        if (i == 0) return static_cast<long>(j);
        if (j == 0) return static_cast<long>(i);
        long& m = memo[i][j];
        if (m >= 0) return m;
        const long sub = go(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1);
        m = std::min({go(i - 1, j) + 1, go(i, j - 1) + 1, sub});
        return m;
    };
    return static_cast<std::size_t>(go(a.size(), b.size()));
}

inline double oracle_anls(const std::string& pred, const std::vector<std::string>& gold) {
    double best = 0.0;
    for (const auto& g : gold) {
        const std::size_t len = std::max(pred.size(), g.size());
        const double nl = len == 0 ? 0.0 : static_cast<double>(oracle_distance(pred, g)) / static_cast<double>(len);
        best = std::max(best, nl < 0.5 ? 1.0 - nl : 0.0);
    }
    return best;
}

inline std::string random_string(Rng& rng, std::size_t max_len) {
    static const std::string alphabet = "abcde";
    std::string s;
    const auto n = rng.below(max_len + 1);
    for (std::uint64_t i = 0; i < n; ++i) s += alphabet[rng.below(alphabet.size())];
    return s;
}

inline Quad box(double x1, double y1, double x2, double y2) { return Quad::from_box(x1, y1, x2, y2); }

/// A token whose quad is centered at (cx, cy).
inline OcrToken token_at(const std::string& text, double cx, double cy, double w = 40, double h = 30) {
    return {text, box(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2)};
}

}  // namespace textvqa::testing
