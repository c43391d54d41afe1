#pragma once

// Reverse-mode automatic differentiation over dense double matrices.
//
// A Tape records every operation of one forward pass. Each recorded node keeps
// its value and a closure that pushes its output gradient to its parents.
// Parameters live in a ParameterStore and are brought onto a tape with
// Tape::param(); Tape::backward() accumulates into Parameter::grad.

#include <Eigen/Dense>

#include <deque>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace textvqa {

using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

namespace ad {

struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;
    bool trainable = true;
};

/// Owns parameters with stable addresses, in registration order.
class ParameterStore {
public:
    Parameter& add(std::string name, Matrix init);
    Parameter& at(std::string_view name);
    const Parameter& at(std::string_view name) const;
    bool contains(std::string_view name) const;

    void zero_grad();
    std::size_t size() const { return params_.size(); }
    std::size_t num_values() const;

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

private:
    std::deque<Parameter> params_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid as long as the tape lives.
class Var {
public:
    Var() = default;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    const Matrix& value() const;
    Index rows() const { return value().rows(); }
    Index cols() const { return value().cols(); }
    double scalar() const { return value()(0, 0); }

    Tape* tape() const { return tape_; }
    std::size_t id() const { return id_; }
    bool valid() const { return tape_ != nullptr; }

private:
    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

class Tape {
public:
    using Backward = std::function<void(const Matrix& out_grad)>;

    Var constant(Matrix value);
    Var param(Parameter& p);

    /// Records a derived node. `parents` decide whether the node needs a gradient;
    /// `backward` is only invoked when it does.
    Var record(Matrix value, std::initializer_list<Var> parents, Backward backward);
    Var record(Matrix value, std::span<const Var> parents, Backward backward);

    /// Adds `g` to the gradient of `v` (no-op for nodes that need none).
    void accumulate(const Var& v, const Matrix& g);
    bool requires_grad(const Var& v) const { return nodes_[v.id()].requires_grad; }

    /// Runs the reverse sweep from a 1x1 root.
    void backward(const Var& root);

    const Matrix& value(std::size_t id) const { return nodes_[id].value; }
    std::size_t size() const { return nodes_.size(); }

    /// Ids of every softmax output recorded on this tape, in recording order.
    const std::vector<std::size_t>& softmax_nodes() const { return softmax_nodes_; }
    void mark_softmax(const Var& v) { softmax_nodes_.push_back(v.id()); }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool has_grad = false;
        bool requires_grad = false;
        Backward backward;
        Parameter* param = nullptr;
    };

    std::vector<Node> nodes_;
    std::vector<std::size_t> softmax_nodes_;
};

// ---- operations ------------------------------------------------------------

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
/// a (n x m) + row (1 x m), broadcast over rows.
Var add_row(const Var& a, const Var& row);
/// Element-wise product.
Var mul(const Var& a, const Var& b);
/// a (n x m) scaled column-wise by row (1 x m).
Var mul_row(const Var& a, const Var& row);
Var scale(const Var& a, double s);
/// 1 - a
Var one_minus(const Var& a);
Var transpose(const Var& a);

Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var relu(const Var& a);

/// Row-wise softmax with max subtraction.
Var softmax_rows(const Var& a);

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_rows(const Var& a, Index start, Index count);
Var slice_cols(const Var& a, Index start, Index count);

/// Rows of `table` picked by index; a negative index yields a zero row.
Var gather_rows(const Var& table, std::span<const Index> ids);

Var sum(const Var& a);
Var mean_rows(const Var& a);

/// Summed binary cross entropy of probabilities `p` against 0/1 `labels`
/// (same shape). Probabilities are clamped to [eps, 1 - eps]; the clamp
/// blocks the gradient outside that range.
Var bce_sum(const Var& p, const Matrix& labels, double eps = 1e-7);

}  // namespace ad
}  // namespace textvqa
