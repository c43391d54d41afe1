#include "textvqa/optimizer.hpp"

#include "textvqa/error.hpp"

#include <cmath>

namespace textvqa {

void AdamaxConfig::validate() const {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ValidationError("lr", "must be a finite non-negative number");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ValidationError("beta1", "must lie in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ValidationError("beta2", "must lie in [0, 1)");
    if (!(eps > 0.0)) throw ValidationError("eps", "must be positive");
    if (!(weight_decay >= 0.0)) throw ValidationError("weight_decay", "must be non-negative");
}

Adamax::Adamax(AdamaxConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void Adamax::step(ad::ParameterStore& store) {
    if (slots_.size() > store.size()) throw ShapeError("optimizer state has more slots than parameters");
    while (slots_.size() < store.size()) slots_.push_back({});
    ++steps_;
    const double correction = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
    const double rate = cfg_.lr / correction;
    std::size_t i = 0;
    for (auto& p : store) {
        Slot& s = slots_[i++];
        if (!p.trainable) continue;
        if (s.m.size() == 0) {
            s.m = Matrix::Zero(p.value.rows(), p.value.cols());
            s.u = Matrix::Zero(p.value.rows(), p.value.cols());
        }
        if (s.m.rows() != p.value.rows() || s.m.cols() != p.value.cols()) {
            throw ShapeError("optimizer state shape differs for " + p.name);
        }
        if (p.grad.size() == 0) continue;
        Matrix g = p.grad;
        if (cfg_.weight_decay > 0.0) g += cfg_.weight_decay * p.value;
        s.m = cfg_.beta1 * s.m + (1.0 - cfg_.beta1) * g;
        s.u = (cfg_.beta2 * s.u).cwiseMax(g.cwiseAbs());
        p.value.array() -= rate * s.m.array() / (s.u.array() + cfg_.eps);
    }
}

void Adamax::restore(std::uint64_t steps, std::vector<Slot> slots) {
    steps_ = steps;
    slots_ = std::move(slots);
}

}  // namespace textvqa
