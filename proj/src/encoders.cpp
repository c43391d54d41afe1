#include "textvqa/encoders.hpp"

#include "textvqa/error.hpp"
#include "textvqa/text.hpp"

#include <algorithm>

namespace textvqa {

void EncoderDims::validate() const {
    if (word_dim < 1) throw ValidationError("word_dim", "must be positive");
    if (ctx_dim < 2 || ctx_dim % 2) throw ValidationError("ctx_dim", "must be a positive even number");
    if (hidden < 2 || hidden % 2) throw ValidationError("hidden", "must be a positive even number");
    if (question_layers < 1) throw ValidationError("question_layers", "must be positive");
    if (context_layers < 1 || context_layers > question_layers) {
        throw ValidationError("context_layers", "must lie in [1, question_layers]");
    }
    if (attn_hidden < 1) throw ValidationError("attn_hidden", "must be positive");
}

QuestionEncoderParams QuestionEncoderParams::create(ad::ParameterStore& store, const std::string& name,
                                                    const EncoderDims& dims, Rng& rng) {
    QuestionEncoderParams p;
    int in = dims.word_input_dim();
    for (int l = 0; l < dims.question_layers; ++l) {
        p.layers.push_back(BiLstmLayer::create(store, name + ".lstm" + std::to_string(l + 1), in, dims.hidden / 2, rng));
        in = dims.hidden;
    }
    p.self_attn = AttnLayer::create(store, name + ".self_attn", dims.hidden, dims.attn_hidden, rng);
    p.pool = &store.add(name + ".pool", uniform_matrix(dims.hidden, 1, 0.1, rng));
    return p;
}

QuestionEncoding encode_question(ad::Tape& tape, const ad::Var& word_vectors, const ContextualEncoder& contextual,
                                 const QuestionEncoderParams& params) {
    if (word_vectors.rows() == 0) throw ValidationError("question", "question has no words");
    QuestionEncoding q;
    q.glove = word_vectors;
    q.contextual = contextual.encode(tape, word_vectors);
    const ad::Var parts[] = {q.glove, q.contextual};
    q.words = ad::concat_cols(parts);
    ad::Var h = q.words;
    for (const auto& layer : params.layers) {
        h = layer.apply(tape, h);
        q.levels.push_back(h);
    }
    q.attended = params.self_attn.apply(tape, h, h, h);
    q.condensed = condense(q.attended, tape.param(*params.pool));
    return q;
}

ContextEncoderParams ContextEncoderParams::create(ad::ParameterStore& store, const std::string& name,
                                                  const EncoderDims& dims, Rng& rng) {
    ContextEncoderParams p;
    const int w = dims.word_input_dim();
    p.word_attn = AttnLayer::create(store, name + ".word_attn", w, dims.attn_hidden, rng);
    p.pos_table = &store.add(name + ".pos_embed", normal_matrix(kNumPosTags, EncoderDims::pos_dim, 0.5, rng));
    p.ner_table = &store.add(name + ".ner_embed", normal_matrix(kNumNerTags, EncoderDims::ner_dim, 0.5, rng));
    int in = 2 * w + EncoderDims::pos_dim + EncoderDims::ner_dim;
    for (int l = 0; l < dims.context_layers; ++l) {
        p.layers.push_back(BiLstmLayer::create(store, name + ".lstm" + std::to_string(l + 1), in, dims.hidden / 2, rng));
        in = dims.hidden;
    }
    for (int k = 1; k <= dims.context_layers + 1; ++k) {
        const int how = w + (k - 1) * dims.hidden;
        p.multilevel.push_back(
            AttnLayer::create(store, name + ".multilevel" + std::to_string(k), how, dims.attn_hidden, rng));
    }
    const int fused = w + dims.context_layers * dims.hidden + (dims.context_layers + 1) * dims.hidden;
    p.self_attn = AttnLayer::create(store, name + ".self_attn", fused, dims.attn_hidden, rng);
    p.final_layer = BiLstmLayer::create(store, name + ".final", 2 * fused, dims.hidden, rng);
    return p;
}

ad::Var word_level_attention(ad::Tape& tape, const ad::Var& context_words, const ad::Var& question_words,
                             const AttnLayer& layer) {
    if (question_words.rows() == 0) throw ValidationError("question", "question has no words");
    return layer.apply(tape, context_words, question_words, question_words);
}

Matrix word_level_attention(const Matrix& context_words, const Matrix& question_words, const AttnParams& params) {
    if (question_words.rows() == 0) throw ValidationError("question", "question has no words");
    return attn(context_words, question_words, question_words, params);
}

ContextEncoding encode_context(ad::Tape& tape, const ad::Var& word_vectors, const std::vector<TokenFeatureIds>& features,
                               const QuestionEncoding& question, const ContextualEncoder& contextual,
                               const ContextEncoderParams& params) {
    if (word_vectors.rows() == 0) throw ValidationError("context", "context has no words");
    if (static_cast<std::size_t>(word_vectors.rows()) != features.size()) {
        throw ShapeError("encode_context: one feature pair per word required");
    }
    ContextEncoding c;
    c.fasttext = word_vectors;
    c.contextual = contextual.encode(tape, word_vectors);
    {
        const ad::Var parts[] = {c.fasttext, c.contextual};
        c.words = ad::concat_cols(parts);
    }
    c.word_attended = word_level_attention(tape, c.words, question.words, params.word_attn);

    std::vector<Index> pos_ids, ner_ids;
    for (const auto& f : features) {
        pos_ids.push_back(f.pos_id);
        ner_ids.push_back(f.ner_id);
    }
    {
        const ad::Var parts[] = {ad::gather_rows(tape.param(*params.pos_table), pos_ids),
                                 ad::gather_rows(tape.param(*params.ner_table), ner_ids)};
        c.features = ad::concat_cols(parts);
    }

    ad::Var h;
    {
        const ad::Var parts[] = {c.fasttext, c.contextual, c.word_attended, c.features};
        h = ad::concat_cols(parts);
    }
    for (const auto& layer : params.layers) {
        h = layer.apply(tape, h);
        c.levels.push_back(h);
    }

    const std::size_t top_question_level = question.levels.size();
    std::vector<ad::Var> how_c = {c.fasttext, c.contextual};
    std::vector<ad::Var> how_q = {question.glove, question.contextual};
    for (std::size_t k = 1; k <= params.multilevel.size(); ++k) {
        if (k > 1) {
            how_c.push_back(c.levels[k - 2]);
            how_q.push_back(question.levels[k - 2]);
        }
        // the question stack may be shallower than K + 1 levels
        const ad::Var& values = question.levels[std::min(k, top_question_level) - 1];
        c.multilevel.push_back(
            params.multilevel[k - 1].apply(tape, ad::concat_cols(how_c), ad::concat_cols(how_q), values));
    }

    std::vector<ad::Var> fused = {c.fasttext, c.contextual};
    fused.insert(fused.end(), c.levels.begin(), c.levels.end());
    fused.insert(fused.end(), c.multilevel.begin(), c.multilevel.end());
    c.fused = ad::concat_cols(fused);
    c.self_attended = params.self_attn.apply(tape, c.fused, c.fused, c.fused);
    const ad::Var final_in[] = {c.fused, c.self_attended};
    c.output = params.final_layer.apply(tape, ad::concat_cols(final_in));
    return c;
}

ObjectWords render_object_words(const std::vector<SceneObject>& objects) {
    ObjectWords out;
    out.num_objects = objects.size();
    for (std::size_t i = 0; i < objects.size(); ++i) {
        std::vector<std::string> words;
        for (const auto& a : objects[i].attributes) {
            for (auto& w : tokenize(a)) words.push_back(std::move(w));
        }
        for (auto& w : tokenize(objects[i].name)) words.push_back(std::move(w));
        if (words.empty()) throw ValidationError("objects", "object " + std::to_string(i) + " renders to no words");
        for (auto& w : words) {
            out.words.push_back(std::move(w));
            out.object_of_word.push_back(i);
        }
    }
    return out;
}

Pooling parse_pooling(const std::string& s) {
    if (s == "mean") return Pooling::mean;
    if (s == "sum") return Pooling::sum;
    throw ValidationError("span_pooling", "expected mean or sum, got '" + s + "'");
}

std::string_view to_string(Pooling p) { return p == Pooling::mean ? "mean" : "sum"; }

Matrix pooling_matrix(const std::vector<std::vector<std::size_t>>& groups, std::size_t positions, Pooling mode) {
    Matrix m = Matrix::Zero(static_cast<Index>(groups.size()), static_cast<Index>(positions));
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].empty()) throw ShapeError("pooling group " + std::to_string(g) + " is empty");
        const double w = mode == Pooling::mean ? 1.0 / static_cast<double>(groups[g].size()) : 1.0;
        for (std::size_t p : groups[g]) {
            if (p >= positions) throw ShapeError("pooling position out of range");
            m(static_cast<Index>(g), static_cast<Index>(p)) += w;
        }
    }
    return m;
}

ad::Var pool_objects(ad::Tape& tape, const ad::Var& word_outputs, const ObjectWords& objects) {
    std::vector<std::vector<std::size_t>> groups(objects.num_objects);
    for (std::size_t i = 0; i < objects.object_of_word.size(); ++i) groups[objects.object_of_word[i]].push_back(i);
    return ad::matmul(tape.constant(pooling_matrix(groups, objects.words.size())), word_outputs);
}

}  // namespace textvqa
