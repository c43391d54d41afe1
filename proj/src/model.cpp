#include "textvqa/model.hpp"

#include "textvqa/error.hpp"
#include "textvqa/recurrent.hpp"
#include "textvqa/text.hpp"

#include <algorithm>
#include <set>

namespace textvqa {

void ModelConfig::validate() const {
    dims.validate();
    if (answer_dim < 1) throw ValidationError("answer_dim", "must be positive");
    if (hash_buckets < 1) throw ValidationError("hash_buckets", "must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ValidationError("dropout", "must lie in [0, 1)");
    if (!(embedding_init > 0.0)) throw ValidationError("embedding_init", "must be positive");
}

std::vector<std::string> collect_vocabulary(const Dataset& d, const std::vector<std::string>& extra_texts) {
    std::set<std::string> words;
    auto add_text = [&](const std::string& text) {
        for (const auto& w : tokenize(text)) words.insert(to_lower(w));
    };
    for (const auto& s : d.samples) {
        add_text(s.question);
        for (const auto& t : s.ocr_tokens) add_text(t.text);
        for (const auto& o : s.objects) {
            add_text(o.name);
            for (const auto& a : o.attributes) add_text(a);
        }
        if (s.dictionary) {
            for (const auto& e : *s.dictionary) add_text(e);
        }
    }
    for (const auto& t : extra_texts) add_text(t);
    return {words.begin(), words.end()};
}

TextVqaModel::TextVqaModel(ModelConfig config, Vocabulary vocab, std::uint64_t seed)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
    config_.validate();
    Rng rng(seed);
    const auto& d = config_.dims;
    question_table_ = &store_.add("embed.words", normal_matrix(vocab_.num_rows(), d.word_dim, config_.embedding_init, rng));
    context_table_ = config_.separate_tables
                         ? &store_.add("embed.context_words",
                                       normal_matrix(vocab_.num_rows(), d.word_dim, config_.embedding_init, rng))
                         : question_table_;
    contextual_ = ContextualEncoder::create(store_, "contextual", d.word_dim, d.ctx_dim, rng);
    question_ = QuestionEncoderParams::create(store_, "question", d, rng);
    ocr_ = ContextEncoderParams::create(store_, "ocr", d, rng);
    object_ = ContextEncoderParams::create(store_, "object", d, rng);
    relate_ = RelateParams::create(store_, "relate", d.context_output_dim(), d.attn_hidden, rng);
    match_ = MatchParams::create(store_, "answer", d.context_output_dim(), d.hidden, config_.answer_dim, rng);
}

void TextVqaModel::set_pretrained(const EmbeddingTable& table) {
    if (table.dim != config_.dims.word_dim) throw ShapeError("pretrained vectors do not match word_dim");
    if (table.rows.rows() != question_table_->value.rows()) {
        throw ShapeError("pretrained vectors do not match the model vocabulary");
    }
    question_table_->value = table.rows;
    question_table_->trainable = table.trainable;
    if (context_table_ != question_table_) {
        context_table_->value = table.rows;
        context_table_->trainable = table.trainable;
    }
}

namespace {

Matrix positions_matrix(const std::vector<PositionalFeature>& rows) {
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(PositionalFeature{}.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
    return m;
}

std::vector<TokenFeatureIds> features_of(const std::vector<std::string>& words) {
    std::vector<TokenFeatureIds> out;
    out.reserve(words.size());
    for (const auto& w : words) out.push_back(pos_ner_ids(w, words));
    return out;
}

}  // namespace

PreparedSample TextVqaModel::prepare(const Sample& sample, const std::vector<std::string>& additional_texts) const {
    PreparedSample p;
    p.sample_id = sample.sample_id;
    p.question_words = tokenize(sample.question);
    if (p.question_words.empty()) throw ValidationError("question", "question of " + sample.sample_id + " is empty");
    p.question_rows = vocab_.rows(p.question_words);

    if (config_.dictionary_mode) {
        p.context = dictionary_context(sample);
        p.candidates = dictionary_mode_candidates(sample);
    } else {
        const ReadingOrder order = compute_reading_order(sample.ocr_tokens, sample.image_width, sample.image_height);
        p.context = build_ocr_context(sample.ocr_tokens, order, sample.image_width, sample.image_height);
        p.candidates = generate_candidates(sample, order, additional_texts);
    }
    std::vector<std::string> context_words;
    std::vector<PositionalFeature> context_pos;
    for (const auto& w : p.context) {
        context_words.push_back(w.text);
        context_pos.push_back(w.position);
    }
    p.context_rows = vocab_.rows(context_words);
    p.context_features = features_of(context_words);
    p.context_positions = positions_matrix(context_pos);

    p.objects = render_object_words(sample.objects);
    p.object_rows = vocab_.rows(p.objects.words);
    p.object_features = features_of(p.objects.words);
    std::vector<PositionalFeature> object_pos;
    for (const auto& o : sample.objects) {
        object_pos.push_back(positional_features(o.quad, sample.image_width, sample.image_height));
    }
    p.object_positions = positions_matrix(object_pos);

    for (const auto& c : p.candidates) {
        if (c.kind == CandidateKind::ocr_span) {
            p.span_groups.push_back(c.context_positions);
        } else if (c.kind == CandidateKind::additional) {
            p.additional_groups.push_back(c.context_positions);
            for (auto& w : tokenize(c.text)) p.additional_words.push_back(std::move(w));
        }
    }
    p.num_spans = p.span_groups.size();
    p.num_additional = p.additional_groups.size();
    p.additional_rows = vocab_.rows(p.additional_words);
    p.additional_features = features_of(p.additional_words);

    if (!sample.gold_answers.empty()) p.labels = make_labels(p.candidates, sample.gold_answers);
    return p;
}

ad::Var TextVqaModel::embed(ad::Tape& tape, ad::Parameter& table, const std::vector<Index>& rows,
                            Rng* dropout_rng) const {
    ad::Var x = ad::gather_rows(tape.param(table), rows);
    if (dropout_rng && config_.dropout > 0.0) {
        const double keep = 1.0 - config_.dropout;
        Matrix mask(x.rows(), x.cols());
        for (Index i = 0; i < mask.rows(); ++i) {
            for (Index j = 0; j < mask.cols(); ++j) mask(i, j) = dropout_rng->coin(keep) ? 1.0 / keep : 0.0;
        }
        x = ad::mul(x, tape.constant(std::move(mask)));
    }
    return x;
}

TextVqaModel::Output TextVqaModel::forward(ad::Tape& tape, const PreparedSample& s, Rng* dropout_rng) const {
    const QuestionEncoding q =
        encode_question(tape, embed(tape, *question_table_, s.question_rows, dropout_rng), contextual_, question_);
    const ad::Var u_q = q.condensed;

    ad::Var u_obj, p_obj;
    if (s.objects.num_objects > 0) {
        const ContextEncoding enc = encode_context(tape, embed(tape, *context_table_, s.object_rows, dropout_rng),
                                                   s.object_features, q, contextual_, object_);
        u_obj = pool_objects(tape, enc.output, s.objects);
        p_obj = tape.constant(s.object_positions);
    }

    Output out;
    ad::Var span_reprs;
    if (s.num_spans > 0) {
        const ContextEncoding enc = encode_context(tape, embed(tape, *context_table_, s.context_rows, dropout_rng),
                                                   s.context_features, q, contextual_, ocr_);
        const ad::Var u_hat = relate(tape, enc.output, tape.constant(s.context_positions), u_obj, p_obj, relate_,
                                     config_.relational_mode);
        span_reprs = candidate_reprs(tape, enc.output, u_hat, s.span_groups, match_, config_.span_pooling);
        out.p_ocr = match_ocr(tape, u_q, span_reprs, match_);
    }

    if (s.num_additional > 0) {
        const ContextEncoding enc = encode_context(tape, embed(tape, *context_table_, s.additional_rows, dropout_rng),
                                                   s.additional_features, q, contextual_, ocr_);
        const ad::Var none = tape.constant(Matrix::Zero(enc.output.rows(), enc.output.cols()));
        const ad::Var add_reprs = candidate_reprs(tape, enc.output, none, s.additional_groups, match_, config_.span_pooling);
        if (s.num_spans > 0) {
            out.p_add = reason_additional(tape, u_q, out.p_ocr, span_reprs, add_reprs, match_);
        } else {
            out.p_add = reason_additional(tape, u_q, tape.constant(Matrix::Ones(1, 1)), tape.param(*match_.null_repr),
                                          add_reprs, match_);
        }
    }

    out.heads = special_heads(tape, u_q, span_reprs, match_);
    if (s.labels) out.loss = answer_loss(out.p_ocr, out.p_add, out.heads, *s.labels);
    return out;
}

Scores scores_from(const TextVqaModel::Output& out) {
    Scores sc;
    auto row = [](const ad::Var& v) {
        std::vector<double> r;
        if (!v.valid()) return r;
        for (Index j = 0; j < v.cols(); ++j) r.push_back(v.value()(0, j));
        return r;
    };
    sc.p_ocr = row(out.p_ocr);
    sc.p_add = row(out.p_add);
    sc.p_yes = out.heads.yes.scalar();
    sc.p_no = out.heads.no.scalar();
    sc.p_unanswerable = out.heads.unanswerable.scalar();
    return sc;
}

Scores TextVqaModel::score(const PreparedSample& sample) const {
    ad::Tape tape;
    return scores_from(forward(tape, sample));
}

PredictionRecord make_prediction(const PreparedSample& sample, const Scores& scores) {
    const Selection sel = select_answer(scores);
    PredictionRecord r;
    r.sample_id = sample.sample_id;
    r.score = sel.score;
    r.pool = std::string(to_string(sel.pool));
    std::size_t offset = 0;
    switch (sel.pool) {
        case CandidateKind::ocr_span: offset = sel.index; break;
        case CandidateKind::additional: offset = sample.num_spans + sel.index; break;
        case CandidateKind::yes: offset = sample.num_spans + sample.num_additional; break;
        case CandidateKind::no: offset = sample.num_spans + sample.num_additional + 1; break;
        case CandidateKind::unanswerable: offset = sample.num_spans + sample.num_additional + 2; break;
    }
    r.answer = sample.candidates.at(offset).text;
    r.p_ocr = scores.p_ocr;
    r.p_add = scores.p_add;
    r.p_yes = scores.p_yes;
    r.p_no = scores.p_no;
    r.p_unanswerable = scores.p_unanswerable;
    return r;
}

PredictionRecord TextVqaModel::predict(const PreparedSample& sample) const {
    return make_prediction(sample, score(sample));
}

}  // namespace textvqa
