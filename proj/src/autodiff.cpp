#include "textvqa/autodiff.hpp"

#include "textvqa/error.hpp"

#include <algorithm>
#include <cmath>

namespace textvqa::ad {

// ---- ParameterStore ----------------------------------------------------------

Parameter& ParameterStore::add(std::string name, Matrix init) {
    if (index_.count(name)) throw Error("config", "duplicate parameter name: " + name);
    index_.emplace(name, params_.size());
    Parameter& p = params_.emplace_back();
    p.name = std::move(name);
    p.grad = Matrix::Zero(init.rows(), init.cols());
    p.value = std::move(init);
    return p;
}

Parameter& ParameterStore::at(std::string_view name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("config", "unknown parameter: " + std::string(name));
    return params_[it->second];
}

const Parameter& ParameterStore::at(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("config", "unknown parameter: " + std::string(name));
    return params_[it->second];
}

bool ParameterStore::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

void ParameterStore::zero_grad() {
    for (auto& p : params_) p.grad.setZero();
}

std::size_t ParameterStore::num_values() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
}

// ---- Tape --------------------------------------------------------------------

const Matrix& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Matrix value) {
    Node& n = nodes_.emplace_back();
    n.value = std::move(value);
    return {this, nodes_.size() - 1};
}

Var Tape::param(Parameter& p) {
    Node& n = nodes_.emplace_back();
    n.value = p.value;
    n.requires_grad = p.trainable;
    n.param = &p;
    return {this, nodes_.size() - 1};
}

Var Tape::record(Matrix value, std::initializer_list<Var> parents, Backward backward) {
    return record(std::move(value), std::span<const Var>(parents.begin(), parents.size()), std::move(backward));
}

Var Tape::record(Matrix value, std::span<const Var> parents, Backward backward) {
    bool needs = false;
    for (const auto& p : parents) needs = needs || nodes_[p.id()].requires_grad;
    Node& n = nodes_.emplace_back();
    n.value = std::move(value);
    n.requires_grad = needs;
    if (needs) n.backward = std::move(backward);
    return {this, nodes_.size() - 1};
}

void Tape::accumulate(const Var& v, const Matrix& g) {
    Node& n = nodes_[v.id()];
    if (!n.requires_grad) return;
    if (!n.has_grad) {
        n.grad = g;
        n.has_grad = true;
    } else {
        n.grad += g;
    }
}

void Tape::backward(const Var& root) {
    if (root.rows() != 1 || root.cols() != 1) throw ShapeError("backward root must be 1x1");
    accumulate(root, Matrix::Ones(1, 1));
    for (std::size_t id = nodes_.size(); id-- > 0;) {
        Node& n = nodes_[id];
        if (!n.has_grad || !n.requires_grad) continue;
        if (n.param) n.param->grad += n.grad;
        if (n.backward) n.backward(n.grad);
    }
}

// ---- operations --------------------------------------------------------------

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
    }
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dims " + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()));
    }
    Tape* t = a.tape();
    return t->record(a.value() * b.value(), {a, b}, [t, a, b](const Matrix& g) {
        if (t->requires_grad(a)) t->accumulate(a, g * b.value().transpose());
        if (t->requires_grad(b)) t->accumulate(b, a.value().transpose() * g);
    });
}

Var add(const Var& a, const Var& b) {
    require_same_shape(a.value(), b.value(), "add");
    Tape* t = a.tape();
    return t->record(a.value() + b.value(), {a, b}, [t, a, b](const Matrix& g) {
        t->accumulate(a, g);
        t->accumulate(b, g);
    });
}

Var sub(const Var& a, const Var& b) {
    require_same_shape(a.value(), b.value(), "sub");
    Tape* t = a.tape();
    return t->record(a.value() - b.value(), {a, b}, [t, a, b](const Matrix& g) {
        t->accumulate(a, g);
        t->accumulate(b, -g);
    });
}

Var add_row(const Var& a, const Var& row) {
    if (row.rows() != 1 || row.cols() != a.cols()) throw ShapeError("add_row: row must be 1 x cols(a)");
    Tape* t = a.tape();
    Matrix out = a.value().rowwise() + row.value().row(0);
    return t->record(std::move(out), {a, row}, [t, a, row](const Matrix& g) {
        t->accumulate(a, g);
        if (t->requires_grad(row)) t->accumulate(row, g.colwise().sum());
    });
}

Var mul(const Var& a, const Var& b) {
    require_same_shape(a.value(), b.value(), "mul");
    Tape* t = a.tape();
    return t->record(a.value().cwiseProduct(b.value()), {a, b}, [t, a, b](const Matrix& g) {
        if (t->requires_grad(a)) t->accumulate(a, g.cwiseProduct(b.value()));
        if (t->requires_grad(b)) t->accumulate(b, g.cwiseProduct(a.value()));
    });
}

Var mul_row(const Var& a, const Var& row) {
    if (row.rows() != 1 || row.cols() != a.cols()) throw ShapeError("mul_row: row must be 1 x cols(a)");
    Tape* t = a.tape();
    Matrix out = a.value().array().rowwise() * row.value().row(0).array();
    return t->record(std::move(out), {a, row}, [t, a, row](const Matrix& g) {
        if (t->requires_grad(a)) {
            Matrix ga = g.array().rowwise() * row.value().row(0).array();
            t->accumulate(a, ga);
        }
        if (t->requires_grad(row)) t->accumulate(row, g.cwiseProduct(a.value()).colwise().sum());
    });
}

Var scale(const Var& a, double s) {
    Tape* t = a.tape();
    return t->record(a.value() * s, {a}, [t, a, s](const Matrix& g) { t->accumulate(a, g * s); });
}

Var one_minus(const Var& a) {
    Tape* t = a.tape();
    Matrix out = (1.0 - a.value().array()).matrix();
    return t->record(std::move(out), {a}, [t, a](const Matrix& g) { t->accumulate(a, -g); });
}

Var transpose(const Var& a) {
    Tape* t = a.tape();
    return t->record(a.value().transpose(), {a}, [t, a](const Matrix& g) { t->accumulate(a, g.transpose()); });
}

Var sigmoid(const Var& a) {
    Tape* t = a.tape();
    Matrix y = a.value().unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    Matrix dy = y.cwiseProduct((1.0 - y.array()).matrix());
    return t->record(std::move(y), {a}, [t, a, dy = std::move(dy)](const Matrix& g) {
        t->accumulate(a, g.cwiseProduct(dy));
    });
}

Var tanh(const Var& a) {
    Tape* t = a.tape();
    Matrix y = a.value().array().tanh().matrix();
    Matrix dy = (1.0 - y.array().square()).matrix();
    return t->record(std::move(y), {a}, [t, a, dy = std::move(dy)](const Matrix& g) {
        t->accumulate(a, g.cwiseProduct(dy));
    });
}

Var relu(const Var& a) {
    Tape* t = a.tape();
    Matrix y = a.value().cwiseMax(0.0);
    return t->record(std::move(y), {a}, [t, a](const Matrix& g) {
        Matrix mask = (a.value().array() > 0.0).cast<double>().matrix();
        t->accumulate(a, g.cwiseProduct(mask));
    });
}

Var softmax_rows(const Var& a) {
    Tape* t = a.tape();
    const Matrix& x = a.value();
    Matrix y(x.rows(), x.cols());
    for (Index i = 0; i < x.rows(); ++i) {
        const double mx = x.row(i).maxCoeff();
        y.row(i) = (x.row(i).array() - mx).exp().matrix();
        y.row(i) /= y.row(i).sum();
    }
    Matrix y_copy = y;
    Var out = t->record(std::move(y), {a}, [t, a, y = std::move(y_copy)](const Matrix& g) {
        Matrix ga(y.rows(), y.cols());
        for (Index i = 0; i < y.rows(); ++i) {
            const double dot = g.row(i).dot(y.row(i));
            ga.row(i) = y.row(i).cwiseProduct((g.row(i).array() - dot).matrix());
        }
        t->accumulate(a, ga);
    });
    t->mark_softmax(out);
    return out;
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no inputs");
    Tape* t = parts.front().tape();
    const Index rows = parts.front().rows();
    Index cols = 0;
    for (const auto& p : parts) {
        if (p.rows() != rows) throw ShapeError("concat_cols: row count mismatch");
        cols += p.cols();
    }
    Matrix out(rows, cols);
    Index at = 0;
    for (const auto& p : parts) {
        out.middleCols(at, p.cols()) = p.value();
        at += p.cols();
    }
    std::vector<Var> keep(parts.begin(), parts.end());
    return t->record(std::move(out), parts, [t, keep = std::move(keep)](const Matrix& g) {
        Index at = 0;
        for (const auto& p : keep) {
            if (t->requires_grad(p)) t->accumulate(p, g.middleCols(at, p.cols()));
            at += p.cols();
        }
    });
}

Var concat_rows(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("concat_rows: no inputs");
    Tape* t = parts.front().tape();
    const Index cols = parts.front().cols();
    Index rows = 0;
    for (const auto& p : parts) {
        if (p.cols() != cols) throw ShapeError("concat_rows: column count mismatch");
        rows += p.rows();
    }
    Matrix out(rows, cols);
    Index at = 0;
    for (const auto& p : parts) {
        out.middleRows(at, p.rows()) = p.value();
        at += p.rows();
    }
    std::vector<Var> keep(parts.begin(), parts.end());
    return t->record(std::move(out), parts, [t, keep = std::move(keep)](const Matrix& g) {
        Index at = 0;
        for (const auto& p : keep) {
            if (t->requires_grad(p)) t->accumulate(p, g.middleRows(at, p.rows()));
            at += p.rows();
        }
    });
}

Var slice_rows(const Var& a, Index start, Index count) {
    if (start < 0 || count < 0 || start + count > a.rows()) throw ShapeError("slice_rows: out of range");
    Tape* t = a.tape();
    const Index rows = a.rows();
    const Index cols = a.cols();
    return t->record(a.value().middleRows(start, count), {a}, [t, a, start, count, rows, cols](const Matrix& g) {
        Matrix ga = Matrix::Zero(rows, cols);
        ga.middleRows(start, count) = g;
        t->accumulate(a, ga);
    });
}

Var slice_cols(const Var& a, Index start, Index count) {
    if (start < 0 || count < 0 || start + count > a.cols()) throw ShapeError("slice_cols: out of range");
    Tape* t = a.tape();
    const Index rows = a.rows();
    const Index cols = a.cols();
    return t->record(a.value().middleCols(start, count), {a}, [t, a, start, count, rows, cols](const Matrix& g) {
        Matrix ga = Matrix::Zero(rows, cols);
        ga.middleCols(start, count) = g;
        t->accumulate(a, ga);
    });
}

Var gather_rows(const Var& table, std::span<const Index> ids) {
    Tape* t = table.tape();
    const Matrix& tv = table.value();
    Matrix out = Matrix::Zero(static_cast<Index>(ids.size()), tv.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] >= tv.rows()) throw ShapeError("gather_rows: index out of range");
        if (ids[i] >= 0) out.row(static_cast<Index>(i)) = tv.row(ids[i]);
    }
    std::vector<Index> keep(ids.begin(), ids.end());
    const Index rows = tv.rows();
    return t->record(std::move(out), {table}, [t, table, keep = std::move(keep), rows](const Matrix& g) {
        Matrix gt = Matrix::Zero(rows, g.cols());
        for (std::size_t i = 0; i < keep.size(); ++i) {
            if (keep[i] >= 0) gt.row(keep[i]) += g.row(static_cast<Index>(i));
        }
        t->accumulate(table, gt);
    });
}

Var sum(const Var& a) {
    Tape* t = a.tape();
    Matrix out(1, 1);
    out(0, 0) = a.value().sum();
    const Index rows = a.rows();
    const Index cols = a.cols();
    return t->record(std::move(out), {a}, [t, a, rows, cols](const Matrix& g) {
        t->accumulate(a, Matrix::Constant(rows, cols, g(0, 0)));
    });
}

Var mean_rows(const Var& a) {
    if (a.rows() == 0) throw ShapeError("mean_rows: empty input");
    Tape* t = a.tape();
    const Index rows = a.rows();
    return t->record(a.value().colwise().mean(), {a}, [t, a, rows](const Matrix& g) {
        t->accumulate(a, g.replicate(rows, 1) / static_cast<double>(rows));
    });
}

Var bce_sum(const Var& p, const Matrix& labels, double eps) {
    require_same_shape(p.value(), labels, "bce_sum");
    Tape* t = p.tape();
    const Matrix& pv = p.value();
    double loss = 0.0;
    Matrix dp(pv.rows(), pv.cols());
    for (Index i = 0; i < pv.size(); ++i) {
        const double raw = pv(i);
        const double q = std::clamp(raw, eps, 1.0 - eps);
        const double y = labels(i);
        loss -= y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
        const bool inside = raw > eps && raw < 1.0 - eps;
        dp(i) = inside ? (q - y) / (q * (1.0 - q)) : 0.0;
    }
    Matrix out(1, 1);
    out(0, 0) = loss;
    return t->record(std::move(out), {p}, [t, p, dp = std::move(dp)](const Matrix& g) {
        t->accumulate(p, dp * g(0, 0));
    });
}

}  // namespace textvqa::ad
