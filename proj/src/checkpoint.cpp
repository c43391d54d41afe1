#include "textvqa/checkpoint.hpp"

#include "textvqa/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace textvqa {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'R', 'U', 'A', 'R', 'T', 'C', 'K', 'P'};

class Writer {
public:
    template <typename T>
    void pod(T v) {
        char buf[sizeof(T)];
        std::memcpy(buf, &v, sizeof(T));
        out_.append(buf, sizeof(T));
    }

    void str(const std::string& s) {
        pod<std::uint64_t>(s.size());
        out_ += s;
    }

    void block(const Matrix& m) {
        for (Index i = 0; i < m.rows(); ++i) {
            for (Index j = 0; j < m.cols(); ++j) pod<double>(m(i, j));
        }
    }

    void raw(const char* p, std::size_t n) { out_.append(p, n); }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(const std::string& bytes) : bytes_(bytes) {}

    template <typename T>
    T pod() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes_.data() + at_, sizeof(T));
        at_ += sizeof(T);
        return v;
    }

    std::string str() {
        const auto n = pod<std::uint64_t>();
        need(n);
        std::string s = bytes_.substr(at_, n);
        at_ += n;
        return s;
    }

    Matrix block(std::uint64_t rows, std::uint64_t cols) {
        if (rows != 0 && cols > (bytes_.size() - at_) / 8 / rows) throw Error("checkpoint", "tensor exceeds file size");
        Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
        for (Index i = 0; i < m.rows(); ++i) {
            for (Index j = 0; j < m.cols(); ++j) m(i, j) = pod<double>();
        }
        return m;
    }

    std::string raw(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(at_, n);
        at_ += n;
        return s;
    }

    std::uint64_t count() {
        const auto n = pod<std::uint64_t>();
        if (n > bytes_.size()) throw Error("checkpoint", "implausible element count");
        return n;
    }

    bool done() const { return at_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (n > bytes_.size() - at_) throw Error("checkpoint", "truncated checkpoint");
    }

    const std::string& bytes_;
    std::size_t at_ = 0;
};

bool same_matrix(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           (a.size() == 0 || std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0);
}

}  // namespace

bool CheckpointTensor::operator==(const CheckpointTensor& o) const {
    return name == o.name && trainable == o.trainable && same_matrix(value, o.value) && same_matrix(m, o.m) &&
           same_matrix(u, o.u);
}

Checkpoint capture_checkpoint(const TextVqaModel& model, const RunConfig& cfg, const Adamax* optimizer,
                              std::uint64_t epoch, const std::string& rng_state, const std::vector<QAPair>& qa_pairs) {
    Checkpoint c;
    c.config_hash = cfg.architecture_hash();
    c.config_text = cfg.to_text();
    c.epoch = epoch;
    c.rng_state = rng_state;
    c.vocab = model.vocab().words();
    for (const auto& p : qa_pairs) c.qa_pairs.push_back({p.question, p.answer, {}});
    c.optimizer_steps = optimizer ? optimizer->steps() : 0;
    std::size_t i = 0;
    for (const auto& p : model.parameters()) {
        CheckpointTensor t{p.name, p.trainable, p.value, {}, {}};
        if (optimizer && i < optimizer->slots().size() && optimizer->slots()[i].m.size() > 0) {
            t.m = optimizer->slots()[i].m;
            t.u = optimizer->slots()[i].u;
        }
        c.tensors.push_back(std::move(t));
        ++i;
    }
    return c;
}

std::string serialize_checkpoint(const Checkpoint& c) {
    Writer w;
    w.raw(kMagic, sizeof kMagic);
    w.pod<std::uint32_t>(c.version);
    w.pod<std::uint64_t>(c.config_hash);
    w.str(c.config_text);
    w.pod<std::uint64_t>(c.epoch);
    w.str(c.rng_state);
    w.pod<std::uint64_t>(c.vocab.size());
    for (const auto& word : c.vocab) w.str(word);
    w.pod<std::uint64_t>(c.qa_pairs.size());
    for (const auto& p : c.qa_pairs) {
        w.str(p.question);
        w.str(p.answer);
    }
    w.pod<std::uint64_t>(c.optimizer_steps);
    w.pod<std::uint64_t>(c.tensors.size());
    for (const auto& t : c.tensors) {
        w.str(t.name);
        w.pod<std::uint8_t>(t.trainable ? 1 : 0);
        w.pod<std::uint64_t>(static_cast<std::uint64_t>(t.value.rows()));
        w.pod<std::uint64_t>(static_cast<std::uint64_t>(t.value.cols()));
        w.block(t.value);
        const bool has_state = t.m.size() > 0;
        w.pod<std::uint8_t>(has_state ? 1 : 0);
        if (has_state) {
            if (t.m.rows() != t.value.rows() || t.m.cols() != t.value.cols() || t.u.rows() != t.value.rows() ||
                t.u.cols() != t.value.cols()) {
                throw ShapeError("optimizer state shape differs for " + t.name);
            }
            w.block(t.m);
            w.block(t.u);
        }
    }
    return w.take();
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
    Reader r(bytes);
    if (r.raw(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) throw Error("checkpoint", "not a checkpoint file");
    Checkpoint c;
    c.version = r.pod<std::uint32_t>();
    if (c.version != Checkpoint::kFormatVersion) {
        throw Error("checkpoint", "unsupported checkpoint version " + std::to_string(c.version));
    }
    c.config_hash = r.pod<std::uint64_t>();
    c.config_text = r.str();
    c.epoch = r.pod<std::uint64_t>();
    c.rng_state = r.str();
    for (auto n = r.count(); n > 0; --n) c.vocab.push_back(r.str());
    for (auto n = r.count(); n > 0; --n) {
        QAPair p;
        p.question = r.str();
        p.answer = r.str();
        c.qa_pairs.push_back(std::move(p));
    }
    c.optimizer_steps = r.pod<std::uint64_t>();
    for (auto n = r.count(); n > 0; --n) {
        CheckpointTensor t;
        t.name = r.str();
        t.trainable = r.pod<std::uint8_t>() != 0;
        const auto rows = r.pod<std::uint64_t>();
        const auto cols = r.pod<std::uint64_t>();
        t.value = r.block(rows, cols);
        if (r.pod<std::uint8_t>() != 0) {
            t.m = r.block(rows, cols);
            t.u = r.block(rows, cols);
        }
        c.tensors.push_back(std::move(t));
    }
    if (!r.done()) throw Error("checkpoint", "trailing bytes after checkpoint");
    return c;
}

void write_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    const std::string bytes = serialize_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing checkpoint: " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return deserialize_checkpoint(ss.str());
}

RunConfig checkpoint_config(const Checkpoint& ckpt) { return parse_config(ckpt.config_text); }

TextVqaModel restore_model(const Checkpoint& ckpt, const RunConfig& cfg, bool force) {
    if (cfg.architecture_hash() != ckpt.config_hash && !force) {
        throw Error("checkpoint", "configuration does not match the checkpoint (architecture hash differs); use --force "
                                  "to override");
    }
    TextVqaModel model(cfg.model, Vocabulary(ckpt.vocab, cfg.model.oov_mode, cfg.model.hash_buckets), 0);
    std::unordered_map<std::string, const CheckpointTensor*> by_name;
    for (const auto& t : ckpt.tensors) by_name.emplace(t.name, &t);
    if (by_name.size() != model.parameters().size()) {
        throw Error("checkpoint", "checkpoint holds " + std::to_string(by_name.size()) + " tensors, model expects " +
                                      std::to_string(model.parameters().size()));
    }
    for (auto& p : model.parameters()) {
        auto it = by_name.find(p.name);
        if (it == by_name.end()) throw Error("checkpoint", "missing tensor " + p.name);
        const Matrix& v = it->second->value;
        if (v.rows() != p.value.rows() || v.cols() != p.value.cols()) {
            throw ShapeError("checkpoint tensor " + p.name + " has a different shape");
        }
        p.value = v;
        p.trainable = it->second->trainable;
    }
    return model;
}

void restore_optimizer(const Checkpoint& ckpt, const TextVqaModel& model, Adamax& optimizer) {
    std::unordered_map<std::string, const CheckpointTensor*> by_name;
    for (const auto& t : ckpt.tensors) by_name.emplace(t.name, &t);
    std::vector<Adamax::Slot> slots;
    for (const auto& p : model.parameters()) {
        auto it = by_name.find(p.name);
        if (it == by_name.end()) throw Error("checkpoint", "missing tensor " + p.name);
        slots.push_back({it->second->m, it->second->u});
    }
    optimizer.restore(ckpt.optimizer_steps, std::move(slots));
}

}  // namespace textvqa
