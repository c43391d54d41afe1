#include "textvqa/relate.hpp"

#include "textvqa/error.hpp"
#include "textvqa/recurrent.hpp"
#include "textvqa/textprep.hpp"

namespace textvqa {

RelationalMode parse_relational_mode(const std::string& s) {
    if (s == "full") return RelationalMode::full;
    if (s == "semantic_only") return RelationalMode::semantic_only;
    if (s == "positional_only") return RelationalMode::positional_only;
    if (s == "weighted_sum") return RelationalMode::weighted_sum;
    if (s == "none") return RelationalMode::none;
    throw ValidationError("relational_mode",
                          "expected full, semantic_only, positional_only, weighted_sum or none, got '" + s + "'");
}

std::string_view to_string(RelationalMode m) {
    switch (m) {
        case RelationalMode::full: return "full";
        case RelationalMode::semantic_only: return "semantic_only";
        case RelationalMode::positional_only: return "positional_only";
        case RelationalMode::weighted_sum: return "weighted_sum";
        case RelationalMode::none: return "none";
    }
    return "full";
}

RelateParams RelateParams::create(ad::ParameterStore& store, const std::string& name, int d_u, int attn_hidden,
                                  Rng& rng) {
    RelateParams p;
    p.semantic = AttnLayer::create(store, name + ".semantic", d_u, attn_hidden, rng);
    p.positional = AttnLayer::create(store, name + ".positional", static_cast<int>(PositionalFeature{}.size()),
                                     attn_hidden, rng);
    p.sum_weights = &store.add(name + ".sum_weights", uniform_matrix(d_u, 1, 0.1, rng));
    return p;
}

ad::Var semantic_attention(ad::Tape& tape, const ad::Var& u_ocr, const ad::Var& u_obj, const AttnLayer& layer) {
    if (u_obj.rows() == 0) throw ShapeError("semantic_attention: no objects");
    return layer.apply(tape, u_ocr, u_obj, u_obj);
}

ad::Var positional_attention(ad::Tape& tape, const ad::Var& p_ocr, const ad::Var& p_obj, const ad::Var& u_obj,
                             const AttnLayer& layer) {
    if (u_obj.rows() == 0) throw ShapeError("positional_attention: no objects");
    return layer.apply(tape, p_ocr, p_obj, u_obj);
}

ad::Var fuse(const ad::Var& semantic, const ad::Var& positional) {
    if (semantic.rows() != positional.rows() || semantic.cols() != positional.cols()) {
        throw ShapeError("fuse: shape mismatch");
    }
    return ad::add(semantic, positional);
}

ad::Var object_weighted_sum(const ad::Var& u_obj, const ad::Var& w) {
    if (u_obj.rows() == 0) throw ShapeError("object_weighted_sum: no objects");
    return condense(u_obj, w);
}

ad::Var relate(ad::Tape& tape, const ad::Var& u_ocr, const ad::Var& p_ocr, const ad::Var& u_obj, const ad::Var& p_obj,
               const RelateParams& params, RelationalMode mode) {
    const bool no_objects = !u_obj.valid() || u_obj.rows() == 0;
    if (no_objects || mode == RelationalMode::none) {
        return tape.constant(Matrix::Zero(u_ocr.rows(), u_ocr.cols()));
    }
    if (u_obj.cols() != u_ocr.cols()) throw ShapeError("relate: OCR and object widths differ");
    switch (mode) {
        case RelationalMode::full:
            return fuse(semantic_attention(tape, u_ocr, u_obj, params.semantic),
                        positional_attention(tape, p_ocr, p_obj, u_obj, params.positional));
        case RelationalMode::semantic_only:
            return semantic_attention(tape, u_ocr, u_obj, params.semantic);
        case RelationalMode::positional_only:
            return positional_attention(tape, p_ocr, p_obj, u_obj, params.positional);
        case RelationalMode::weighted_sum: {
            const ad::Var pooled = object_weighted_sum(u_obj, tape.param(*params.sum_weights));
            return ad::matmul(tape.constant(Matrix::Ones(u_ocr.rows(), 1)), pooled);
        }
        case RelationalMode::none: break;
    }
    return tape.constant(Matrix::Zero(u_ocr.rows(), u_ocr.cols()));
}

Matrix semantic_attention(const Matrix& u_ocr, const Matrix& u_obj, const AttnParams& params) {
    if (u_obj.rows() == 0) throw ShapeError("semantic_attention: no objects");
    return attn(u_ocr, u_obj, u_obj, params);
}

Matrix positional_attention(const Matrix& p_ocr, const Matrix& p_obj, const Matrix& u_obj, const AttnParams& params) {
    if (u_obj.rows() == 0) throw ShapeError("positional_attention: no objects");
    return attn(p_ocr, p_obj, u_obj, params);
}

Matrix fuse(const Matrix& semantic, const Matrix& positional) {
    if (semantic.rows() != positional.rows() || semantic.cols() != positional.cols()) {
        throw ShapeError("fuse: shape mismatch");
    }
    return semantic + positional;
}

Matrix object_weighted_sum(const Matrix& u_obj, const Matrix& w) {
    if (u_obj.rows() == 0) throw ShapeError("object_weighted_sum: no objects");
    return condense(u_obj, w);
}

}  // namespace textvqa
