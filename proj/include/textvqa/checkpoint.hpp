#pragma once

// Checkpoint container, little-endian throughout:
//
//   magic        8 bytes  "TVQACKPT"
//   version      u32
//   config_hash  u64      RunConfig::architecture_hash()
//   config       str      RunConfig::to_text()
//   epoch        u64
//   rng_state    str
//   vocab        u64 count, then str per word
//   qa_pairs     u64 count, then (str question, str answer) per pair
//   opt_steps    u64
//   tensors      u64 count, then per tensor:
//                  str name, u8 trainable, u64 rows, u64 cols, f64[rows*cols] row-major,
//                  u8 has_state, and when set two more f64 blocks (m, u)
//
// where str is a u64 byte length followed by the bytes.

#include "textvqa/config.hpp"
#include "textvqa/model.hpp"
#include "textvqa/optimizer.hpp"
#include "textvqa/retrieval.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace textvqa {

struct CheckpointTensor {
    std::string name;
    bool trainable = true;
    Matrix value;
    Matrix m;  // optimizer state; empty when absent
    Matrix u;

    bool operator==(const CheckpointTensor& o) const;
};

struct Checkpoint {
    static constexpr std::uint32_t kFormatVersion = 1;

    std::uint32_t version = kFormatVersion;
    std::uint64_t config_hash = 0;
    std::string config_text;
    std::uint64_t epoch = 0;
    std::string rng_state;
    std::vector<std::string> vocab;
    std::vector<QAPair> qa_pairs;
    std::uint64_t optimizer_steps = 0;
    std::vector<CheckpointTensor> tensors;

    bool operator==(const Checkpoint&) const = default;
};

Checkpoint capture_checkpoint(const TextVqaModel& model, const RunConfig& cfg, const Adamax* optimizer,
                              std::uint64_t epoch, const std::string& rng_state, const std::vector<QAPair>& qa_pairs);

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void write_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint read_checkpoint(const std::string& path);

/// The configuration stored in the checkpoint.
RunConfig checkpoint_config(const Checkpoint& ckpt);

/// Rebuilds the model under `cfg`. A config whose architecture hash differs
/// from the checkpoint's is an error unless `force` is set (tensor shapes must
/// still match).
TextVqaModel restore_model(const Checkpoint& ckpt, const RunConfig& cfg, bool force = false);

/// Optimizer state aligned with `model`'s parameter order.
void restore_optimizer(const Checkpoint& ckpt, const TextVqaModel& model, Adamax& optimizer);

}  // namespace textvqa
