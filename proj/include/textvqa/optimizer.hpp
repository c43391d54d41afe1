#pragma once

// Adamax:
//   m_t = b1 m + (1 - b1) g
//   u_t = max(b2 u, |g|)
//   theta -= lr / (1 - b1^t) * m_t / (u_t + eps)

#include "textvqa/autodiff.hpp"

#include <cstdint>
#include <vector>

namespace textvqa {

struct AdamaxConfig {
    double lr = 2e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;

    void validate() const;
};

class Adamax {
public:
    struct Slot {
        Matrix m;
        Matrix u;
    };

    explicit Adamax(AdamaxConfig cfg = {});

    /// Updates every trainable parameter from its accumulated gradient. Slots
    /// follow the store's registration order.
    void step(ad::ParameterStore& store);

    std::uint64_t steps() const { return steps_; }
    const std::vector<Slot>& slots() const { return slots_; }
    void restore(std::uint64_t steps, std::vector<Slot> slots);
    const AdamaxConfig& config() const { return cfg_; }

private:
    AdamaxConfig cfg_;
    std::uint64_t steps_ = 0;
    std::vector<Slot> slots_;
};

}  // namespace textvqa
