#pragma once

// OCR -> object relational reasoning.
//   semantic:   û^S_i = Attn(u^O_i, {u^D_j}, {u^D_j})
//   positional: û^P_i = Attn(p^O_i, {p^D_j}, {u^D_j})   (8-dim positional keys)
//   fused:      û^O = û^S + û^P
// With no objects, or relational mode `none`, û^O is all zeros.

#include "textvqa/attention.hpp"
#include "textvqa/autodiff.hpp"
#include "textvqa/rng.hpp"

#include <string>
#include <string_view>

namespace textvqa {

enum class RelationalMode { full, semantic_only, positional_only, weighted_sum, none };

RelationalMode parse_relational_mode(const std::string& s);
std::string_view to_string(RelationalMode m);

struct RelateParams {
    AttnLayer semantic;
    AttnLayer positional;
    ad::Parameter* sum_weights = nullptr;  // d_u x 1, weighted-sum baseline

    static RelateParams create(ad::ParameterStore& store, const std::string& name, int d_u, int attn_hidden,
                               Rng& rng);
};

ad::Var semantic_attention(ad::Tape& tape, const ad::Var& u_ocr, const ad::Var& u_obj, const AttnLayer& layer);
ad::Var positional_attention(ad::Tape& tape, const ad::Var& p_ocr, const ad::Var& p_obj, const ad::Var& u_obj,
                             const AttnLayer& layer);
ad::Var fuse(const ad::Var& semantic, const ad::Var& positional);
/// 1 x d_u softmax(u^D w)-weighted mean of object rows.
ad::Var object_weighted_sum(const ad::Var& u_obj, const ad::Var& w);

/// û^O (rows of u_ocr x d_u) under the given mode. `u_obj`/`p_obj` may be
/// invalid or empty when the image has no objects.
ad::Var relate(ad::Tape& tape, const ad::Var& u_ocr, const ad::Var& p_ocr, const ad::Var& u_obj, const ad::Var& p_obj,
               const RelateParams& params, RelationalMode mode);

Matrix semantic_attention(const Matrix& u_ocr, const Matrix& u_obj, const AttnParams& params);
Matrix positional_attention(const Matrix& p_ocr, const Matrix& p_obj, const Matrix& u_obj, const AttnParams& params);
Matrix fuse(const Matrix& semantic, const Matrix& positional);
Matrix object_weighted_sum(const Matrix& u_obj, const Matrix& w);

}  // namespace textvqa
