#include "humor/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>

#include "humor/csv.hpp"
#include "humor/error.hpp"

namespace humor {

std::vector<HeadlineInstance> Dataset::all_headlines() const {
  if (subtask == 1) return headlines;
  std::vector<HeadlineInstance> out;
  out.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    out.push_back(p.first);
    out.push_back(p.second);
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& csv_path, int subtask) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw Error("cannot open " + csv_path.string());
  Dataset d;
  d.subtask = subtask;
  try {
    if (subtask == 1) {
      d.headlines = parse_task1(in);
    } else if (subtask == 2) {
      d.pairs = parse_task2(in);
    } else {
      throw Error("subtask must be 1 or 2");
    }
  } catch (const ParseError& e) {
    throw ParseError(e.row(), csv_path.string() + ": " + e.what());
  }
  return d;
}

Dataset merge_extra(Dataset train, const Dataset& extra) {
  if (train.subtask != extra.subtask) throw Error("cannot merge splits of different subtasks");
  train.headlines = merge_extra(std::move(train.headlines), extra.headlines);
  train.pairs = merge_extra(std::move(train.pairs), extra.pairs);
  return train;
}

DataPaths DataPaths::released_layout(const std::filesystem::path& root, int subtask) {
  const auto dir = root / ("subtask-" + std::to_string(subtask));
  return {dir / "train.csv", dir / "dev.csv", dir / "test.csv", dir / "train_funlines.csv"};
}

Resources load_resources(const ExperimentConfig& config, const std::vector<const Dataset*>& vocabulary_sources,
                         const std::filesystem::path& backend_dir) {
  Resources r;
  if (config.table_encoder()) {
    if (config.embeddings.empty()) throw Error("the table encoder needs an embedding file (--embeddings)");
    std::vector<Words> sentences;
    for (const Dataset* d : vocabulary_sources) {
      for (const auto& h : d->all_headlines()) {
        auto t = build_triple(h);
        sentences.push_back(std::move(t.original_tokens));
        sentences.push_back(std::move(t.edited_tokens));
      }
    }
    std::ifstream in(config.embeddings);
    if (!in) throw Error("cannot open embedding file " + config.embeddings);
    EmbeddingLoadReport report;
    auto table = load_embeddings(in, config.embedding_dim, vocabulary_filter(sentences), &report);
    if (!report.duplicate_lines.empty()) {
      std::cerr << "warning: " << report.duplicate_lines.size() << " duplicate embedding rows ignored (first at line "
                << report.duplicate_lines.front() << ")\n";
    }
    r.table = std::make_shared<const EmbeddingTable>(std::move(table));
  } else {
    const auto identity = config.encoder;
    const auto dir = backend_dir;
    make_backend(identity, dir);  // fail early on a bad identity
    r.backend_factory = [identity, dir] { return make_backend(identity, dir); };
  }
  return r;
}

// ---------------------------------------------------------------- model

FunninessModel::FunninessModel(const ExperimentConfig& config, const Resources& resources) : config_(config) {
  config_.validate();
  if (config_.table_encoder()) {
    if (!resources.table) throw Error("table encoder requested but no embedding table loaded");
    table_ = resources.table;
    d_ = table_->dimension();
    if (config_.transfer == Transfer::Finetune) table_weights_.emplace(table_->matrix());
  } else {
    if (!resources.backend_factory) throw Error("contextual encoder requested but no backend available");
    backend_ = resources.backend_factory();
    d_ = backend_->hidden_size();
    if (config_.transfer == Transfer::Freeze) {
      mix_.emplace(backend_->num_layers() + 1);
    } else if (!backend_->trainable()) {
      throw Error("backend '" + backend_->identity() + "' does not support finetuning");
    }
  }
  head_ = ScoreHead(config_.head_kind(), fusion_width(d_, config_.feature), config_.seed, config_.mlp_hidden);
}

Vector FunninessModel::table_vector(const std::optional<std::size_t>& row) const {
  if (!row) return Vector::Zero(static_cast<Eigen::Index>(d_));
  if (table_weights_) return table_weights_->value.col(static_cast<Eigen::Index>(*row));
  return table_->matrix().col(static_cast<Eigen::Index>(*row));
}

namespace {

std::vector<std::optional<std::size_t>> rows_for(const Words& words, Span span, const EmbeddingTable& table,
                                                 std::optional<std::size_t> skip = std::nullopt) {
  std::vector<std::optional<std::size_t>> out;
  for (std::size_t pos = span.start; pos <= span.end; ++pos) {
    if (skip && pos == *skip) continue;
    out.push_back(table.find(words[pos - 1]));
  }
  return out;
}

Vector top_span_mean(const LayerStack& stack, std::size_t start, std::size_t end) {
  return stack.layers.back()
      .middleCols(static_cast<Eigen::Index>(start - 1), static_cast<Eigen::Index>(end - start + 1))
      .rowwise()
      .mean();
}

}  // namespace

PreparedHeadline FunninessModel::prepare(const HeadlineInstance& instance) const {
  PreparedHeadline p;
  p.gold = instance.mean_grade;
  p.triple = build_triple(instance);
  const auto& t = p.triple;
  if (table_) {
    if (t.context_tokens.size() < 2) throw Error("headline " + instance.id + ": context has no words besides the mask");
    p.edit_rows = rows_for(t.edited_tokens, t.edit_span, *table_);
    p.original_rows = rows_for(t.original_tokens, t.original_span, *table_);
    p.context_rows = rows_for(t.context_tokens, {1, t.context_tokens.size()}, *table_, t.context_span.start);
    if (!table_weights_) p.frozen = encode(p);
    return p;
  }
  p.inputs = prepare_contextual(t, *backend_);
  if (mix_) {
    const auto& in = p.inputs;
    p.edit_layers = span_layer_means(backend_->forward(in.edited), in.edit_span.start, in.edit_span.end);
    if (config_.feature != FeatureMode::Edit) {
      p.original_layers =
          span_layer_means(backend_->forward(in.original), in.original_span.start, in.original_span.end);
      p.mask_layers = span_layer_means(backend_->forward(in.context), in.mask_position, in.mask_position);
    }
  }
  return p;
}

std::vector<PreparedHeadline> FunninessModel::prepare_all(const std::vector<HeadlineInstance>& instances) const {
  std::vector<PreparedHeadline> out;
  out.reserve(instances.size());
  for (const auto& h : instances) out.push_back(prepare(h));
  return out;
}

SpanEmbeddings FunninessModel::encode(const PreparedHeadline& item, Tape* tape) const {
  SpanEmbeddings s;
  const bool pair_mode = config_.feature != FeatureMode::Edit;
  if (table_) {
    if (!table_weights_ && item.frozen.u.size() > 0) return item.frozen;
    auto gather = [&](const auto& rows) {
      std::vector<Vector> vs;
      vs.reserve(rows.size());
      for (const auto& r : rows) vs.push_back(table_vector(r));
      return vs;
    };
    s.u = mean_pool(gather(item.edit_rows));
    s.v_prime = mean_pool(gather(item.original_rows));
    s.v = max_pool(gather(item.context_rows));
    return s;
  }
  const auto& in = item.inputs;
  if (mix_) {
    s.u = mix_->apply(item.edit_layers);
    if (pair_mode) {
      s.v_prime = mix_->apply(item.original_layers);
      s.v = mix_->apply(item.mask_layers);
    }
    return s;
  }
  LayerStack edited = backend_->forward(in.edited);
  s.u = top_span_mean(edited, in.edit_span.start, in.edit_span.end);
  if (pair_mode) {
    LayerStack original = backend_->forward(in.original);
    LayerStack context = backend_->forward(in.context);
    s.v_prime = top_span_mean(original, in.original_span.start, in.original_span.end);
    s.v = top_span_mean(context, in.mask_position, in.mask_position);
    if (tape) {
      tape->original = std::move(original);
      tape->context = std::move(context);
    }
  }
  if (tape) tape->edited = std::move(edited);
  return s;
}

double FunninessModel::forward(const PreparedHeadline& item, Tape* tape) const {
  SpanEmbeddings spans = encode(item, tape);
  const FusionFeature h = fuse(spans, config_.feature);
  const double z = head_.forward(h.h, tape ? &tape->head : nullptr);
  if (tape) tape->spans = std::move(spans);
  return z;
}

void FunninessModel::backward(const PreparedHeadline& item, const Tape& tape, double grad_z) {
  const Vector dh = head_.backward(tape.head, grad_z);
  const auto mode = config_.feature;
  Vector du;
  Vector dy;  // gradient w.r.t. v (Context) or v' (Original)
  if (mode == FeatureMode::Edit) {
    du = dh;
  } else {
    const Vector& y = mode == FeatureMode::Context ? tape.spans.v : tape.spans.v_prime;
    std::tie(du, dy) = fuse_pair_backward(tape.spans.u, y, dh);
  }

  if (table_) {
    if (!table_weights_) return;
    auto& grad = table_weights_->grad;
    auto spread_mean = [&](const auto& rows, const Vector& g) {
      const double inv = 1.0 / static_cast<double>(rows.size());
      for (const auto& r : rows) {
        if (r) grad.col(static_cast<Eigen::Index>(*r)) += inv * g;
      }
    };
    spread_mean(item.edit_rows, du);
    if (mode == FeatureMode::Original) spread_mean(item.original_rows, dy);
    if (mode == FeatureMode::Context) {
      // Max pooling routes each coordinate to the first row attaining it.
      std::vector<Vector> vs;
      for (const auto& r : item.context_rows) vs.push_back(table_vector(r));
      for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(d_); ++k) {
        std::size_t arg = 0;
        for (std::size_t i = 1; i < vs.size(); ++i) {
          if (vs[i](k) > vs[arg](k)) arg = i;
        }
        if (const auto& r = item.context_rows[arg]) grad(k, static_cast<Eigen::Index>(*r)) += dy(k);
      }
    }
    return;
  }

  const auto& in = item.inputs;
  if (mix_) {
    mix_->backward(item.edit_layers, du);
    if (mode == FeatureMode::Context) mix_->backward(item.mask_layers, dy);
    if (mode == FeatureMode::Original) mix_->backward(item.original_layers, dy);
    return;
  }
  auto span_grad = [&](const LayerStack& stack, std::size_t start, std::size_t end, const Vector& g) {
    Matrix top = Matrix::Zero(stack.layers.back().rows(), stack.layers.back().cols());
    const double inv = 1.0 / static_cast<double>(end - start + 1);
    for (std::size_t pos = start; pos <= end; ++pos) top.col(static_cast<Eigen::Index>(pos - 1)) = inv * g;
    return top;
  };
  backend_->backward(in.edited, tape.edited, span_grad(tape.edited, in.edit_span.start, in.edit_span.end, du));
  if (mode == FeatureMode::Context) {
    backend_->backward(in.context, tape.context, span_grad(tape.context, in.mask_position, in.mask_position, dy));
  }
  if (mode == FeatureMode::Original) {
    backend_->backward(in.original, tape.original,
                       span_grad(tape.original, in.original_span.start, in.original_span.end, dy));
  }
}

double FunninessModel::predict(const PreparedHeadline& item) const {
  const double z = forward(item);
  return config_.clamp ? clamp_grade(z) : z;
}

std::vector<NamedTensor> FunninessModel::parameters() {
  auto out = head_.parameters();
  if (mix_) {
    auto m = mix_->parameters();
    out.insert(out.end(), m.begin(), m.end());
  }
  if (table_weights_) out.push_back({"table.weights", &*table_weights_});
  if (backend_ && config_.transfer == Transfer::Finetune) {
    auto b = backend_->parameters();
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

void FunninessModel::zero_grad() {
  for (auto& p : parameters()) p.tensor->zero_grad();
}

Checkpoint FunninessModel::snapshot() const {
  Checkpoint c;
  c.config = config_;
  c.backend_identity = table_ ? std::string(kTableEncoder) : backend_->identity();
  for (const auto& p : const_cast<FunninessModel*>(this)->parameters()) {
    if (p.name == "table.weights") continue;
    c.tensors.emplace(p.name, p.tensor->value);
  }
  if (table_weights_) {
    const Matrix& base = table_->matrix();
    for (Eigen::Index r = 0; r < base.cols(); ++r) {
      if (table_weights_->value.col(r) != base.col(r)) {
        c.table_rows.emplace(table_->word(static_cast<std::size_t>(r)), table_weights_->value.col(r));
      }
    }
  }
  return c;
}

void FunninessModel::restore(const Checkpoint& checkpoint) {
  if (checkpoint.config.hash() != config_.hash()) throw Error("checkpoint was trained with a different config");
  const std::string identity = table_ ? std::string(kTableEncoder) : backend_->identity();
  if (checkpoint.backend_identity != identity) {
    throw Error("checkpoint encoder '" + checkpoint.backend_identity + "' does not match '" + identity + "'");
  }
  for (auto& p : parameters()) {
    if (p.name == "table.weights") continue;
    auto it = checkpoint.tensors.find(p.name);
    if (it == checkpoint.tensors.end()) throw Error("checkpoint lacks tensor " + p.name);
    if (it->second.rows() != p.tensor->value.rows() || it->second.cols() != p.tensor->value.cols()) {
      throw Error("checkpoint tensor " + p.name + " has the wrong shape");
    }
    p.tensor->value = it->second;
  }
  if (table_weights_) {
    for (const auto& [word, values] : checkpoint.table_rows) {
      auto row = table_->find(word);
      if (row && table_->word(*row) == word) table_weights_->value.col(static_cast<Eigen::Index>(*row)) = values;
    }
  }
}

// ---------------------------------------------------------------- training

std::optional<double> selection_metric(const MetricsReport& report) { return report.primary(); }

bool improves(int subtask, const std::optional<double>& candidate, const std::optional<double>& incumbent) {
  if (!candidate) return false;
  if (!incumbent) return true;
  return subtask == 1 ? *candidate < *incumbent : *candidate > *incumbent;
}

double RunRecord::best_value() const {
  auto v = selection_metric(history.at(best_index).dev);
  return v ? *v : std::nan("");
}

nlohmann::json RunRecord::to_json() const {
  nlohmann::json j;
  j["config"] = config.to_json();
  j["config_hash"] = config_hash;
  auto h = nlohmann::json::array();
  for (const auto& e : history) {
    h.push_back({{"epoch", e.epoch},
                 {"step_in_epoch", e.step_in_epoch},
                 {"global_step", e.global_step},
                 {"train_loss", e.train_loss},
                 {"dev", e.dev.to_json()}});
  }
  j["history"] = h;
  j["best_index"] = best_index;
  j["best_value"] = best_value();
  if (test) j["test"] = test->to_json();
  return j;
}

std::vector<std::size_t> validation_steps(std::size_t steps_per_epoch) {
  return {steps_per_epoch / 3, 2 * steps_per_epoch / 3, steps_per_epoch};
}

double scheduled_learning_rate(const ExperimentConfig& config, std::size_t step, std::size_t total_steps) {
  const double lr = config.effective_learning_rate();
  if (config.schedule == Schedule::Constant || total_steps == 0) return lr;
  return lr * (1.0 - static_cast<double>(step) / static_cast<double>(total_steps));
}

namespace {

// Prepared items of a split; Subtask 2 pairs occupy consecutive slots.
struct PreparedSplit {
  const Dataset* data = nullptr;
  std::vector<PreparedHeadline> items;
};

PreparedSplit prepare_split(const FunninessModel& model, const Dataset& data) {
  return {&data, model.prepare_all(data.all_headlines())};
}

MetricsReport evaluate_prepared(const FunninessModel& model, const PreparedSplit& split) {
  MetricsReport report;
  report.subtask = split.data->subtask;
  if (split.data->subtask == 1) {
    std::vector<double> pred, truth;
    for (const auto& item : split.items) {
      if (!item.gold) continue;
      pred.push_back(model.predict(item));
      truth.push_back(*item.gold);
    }
    if (pred.empty()) throw Error("split has no graded headlines to evaluate");
    report.task1 = evaluate_task1(pred, truth);
    return report;
  }
  std::vector<int> gold, predicted;
  std::vector<std::optional<double>> g1, g2;
  std::vector<double> z1, z2;
  for (std::size_t i = 0; i < split.data->pairs.size(); ++i) {
    const auto& pair = split.data->pairs[i];
    if (!pair.label) continue;
    const double a = model.predict(split.items[2 * i]);
    const double b = model.predict(split.items[2 * i + 1]);
    gold.push_back(*pair.label);
    predicted.push_back(predict_label(a, b));
    g1.push_back(pair.first.mean_grade);
    g2.push_back(pair.second.mean_grade);
    z1.push_back(a);
    z2.push_back(b);
  }
  if (gold.empty()) throw Error("split has no labeled pairs to evaluate");
  report.task2 = evaluate_task2(gold, predicted, g1, g2, z1, z2);
  return report;
}

void shuffle_indices(std::vector<std::size_t>& order, std::mt19937_64& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
}

}  // namespace

RunRecord train(const ExperimentConfig& config, const Dataset& train_data, const Dataset& dev_data,
                const Resources& resources, const TrainOptions& options) {
  config.validate();
  if (train_data.subtask != config.subtask || dev_data.subtask != config.subtask) {
    throw Error("training data does not match subtask " + std::to_string(config.subtask));
  }
  FunninessModel model(config, resources);

  // Units of sampling: headlines (Subtask 1) or pairs (Subtask 2), labeled only.
  std::vector<PreparedHeadline> items;
  std::vector<std::size_t> unit_start;
  const std::size_t members = config.subtask == 1 ? 1 : 2;
  if (config.subtask == 1) {
    for (const auto& h : train_data.headlines) {
      if (!h.labeled()) continue;
      unit_start.push_back(items.size());
      items.push_back(model.prepare(h));
    }
  } else {
    for (const auto& p : train_data.pairs) {
      if (!p.scored()) continue;
      unit_start.push_back(items.size());
      items.push_back(model.prepare(p.first));
      items.push_back(model.prepare(p.second));
    }
  }
  if (unit_start.empty()) throw Error("no labeled training data");
  const PreparedSplit dev = prepare_split(model, dev_data);

  const std::size_t n = unit_start.size();
  const std::size_t batch = config.effective_batch_size();
  const std::size_t steps_per_epoch = (n + batch - 1) / batch;
  const std::size_t total_steps = steps_per_epoch * config.max_epochs;
  const auto checkpoints = validation_steps(steps_per_epoch);

  RunRecord record;
  record.config = config;
  record.config_hash = config.hash();

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto params = model.parameters();
  Adam adam;
  std::optional<double> best;
  std::size_t global_step = 0;
  double loss_sum = 0.0;
  std::size_t loss_count = 0;

  auto validate = [&](std::size_t epoch, std::size_t step_in_epoch) {
    ValidationEvent ev;
    ev.epoch = epoch;
    ev.step_in_epoch = step_in_epoch;
    ev.global_step = global_step;
    ev.train_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : std::nan("");
    ev.dev = evaluate_prepared(model, dev);
    loss_sum = 0.0;
    loss_count = 0;
    const auto metric = selection_metric(ev.dev);
    const bool take = config.selection == Selection::LastEpoch || improves(config.subtask, metric, best) ||
                      record.history.empty();
    record.history.push_back(ev);
    if (take) {
      if (config.selection == Selection::BestDev && metric) best = metric;
      record.best_index = record.history.size() - 1;
      record.best = model.snapshot();
      record.best.metadata = {{"epoch", ev.epoch},
                              {"step_in_epoch", ev.step_in_epoch},
                              {"global_step", ev.global_step},
                              {"selection", to_string(config.selection)},
                              {"selection_metric", config.subtask == 1 ? "dev_rmse" : "dev_accuracy"},
                              {"selection_value", metric ? nlohmann::json(*metric) : nlohmann::json(nullptr)}};
    }
    if (options.verbose) {
      std::cerr << "epoch " << epoch << " step " << step_in_epoch << "/" << steps_per_epoch << "  loss "
                << format_real(ev.train_loss, 4) << "  dev " << (config.subtask == 1 ? "rmse " : "acc ")
                << format_real(metric, 4) << (take ? "  *" : "") << "\n";
    }
    if (options.on_validation) options.on_validation(ev);
  };

  FunninessModel::Tape tape;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_indices(order, rng);
    std::size_t next_check = 0;
    while (next_check < checkpoints.size() && checkpoints[next_check] == 0) {
      validate(epoch, 0);
      ++next_check;
    }
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      const std::size_t begin = s * batch;
      const std::size_t end = std::min(n, begin + batch);
      const double inv_b = 1.0 / static_cast<double>(end - begin);
      model.zero_grad();
      double loss = 0.0;
      for (std::size_t k = begin; k < end; ++k) {
        for (std::size_t m = 0; m < members; ++m) {
          const auto& item = items[unit_start[order[k]] + m];
          const double z = model.forward(item, &tape);
          const double err = z - *item.gold;
          loss += err * err * inv_b;
          model.backward(item, tape, 2.0 * err * inv_b);
        }
      }
      if (!std::isfinite(loss)) {
        throw Error("non-finite training loss at epoch " + std::to_string(epoch) + ", step " + std::to_string(s + 1) +
                    " (lr " + std::to_string(scheduled_learning_rate(config, global_step, total_steps)) + ")");
      }
      clip_grad_norm(params, config.clip_norm);
      adam.step(params, scheduled_learning_rate(config, global_step, total_steps));
      ++global_step;
      loss_sum += loss;
      ++loss_count;
      while (next_check < checkpoints.size() && checkpoints[next_check] == s + 1) {
        validate(epoch, s + 1);
        ++next_check;
      }
    }
  }
  return record;
}

MetricsReport evaluate(const FunninessModel& model, const Dataset& split) {
  if (split.subtask != model.config().subtask) {
    throw Error("subtask mismatch: model scores subtask " + std::to_string(model.config().subtask) +
                ", split is subtask " + std::to_string(split.subtask));
  }
  return evaluate_prepared(model, prepare_split(model, split));
}

MetricsReport evaluate(const Checkpoint& checkpoint, const Dataset& split, const Resources& resources) {
  if (split.subtask != checkpoint.config.subtask) {
    throw Error("subtask mismatch: checkpoint scores subtask " + std::to_string(checkpoint.config.subtask) +
                ", split is subtask " + std::to_string(split.subtask));
  }
  FunninessModel model(checkpoint.config, resources);
  model.restore(checkpoint);
  return evaluate(model, split);
}

std::vector<double> predict_scores(const FunninessModel& model, const std::vector<HeadlineInstance>& headlines) {
  std::vector<double> out;
  out.reserve(headlines.size());
  for (const auto& h : headlines) out.push_back(model.predict(model.prepare(h)));
  return out;
}

void write_predictions(const FunninessModel& model, const Dataset& data, std::ostream& out) {
  if (data.subtask != model.config().subtask) throw Error("subtask mismatch between model and input");
  out << "id,pred\n";
  const auto scores = predict_scores(model, data.all_headlines());
  out << std::setprecision(10);
  if (data.subtask == 1) {
    for (std::size_t i = 0; i < data.headlines.size(); ++i) {
      out << csv::quote_if_needed(data.headlines[i].id) << ',' << scores[i] << '\n';
    }
  } else {
    for (std::size_t i = 0; i < data.pairs.size(); ++i) {
      out << csv::quote_if_needed(data.pairs[i].id) << ',' << predict_label(scores[2 * i], scores[2 * i + 1]) << '\n';
    }
  }
}

void export_predictions(const Checkpoint& checkpoint, const std::filesystem::path& input_csv,
                        const std::filesystem::path& output_path, const Resources& resources) {
  const Dataset data = load_dataset(input_csv, checkpoint.config.subtask);
  FunninessModel model(checkpoint.config, resources);
  model.restore(checkpoint);
  std::ofstream out(output_path);
  if (!out) throw Error("cannot write " + output_path.string());
  write_predictions(model, data, out);
  if (!out) throw Error("failed writing " + output_path.string());
}

MetricsReport mean_grade_baseline(const Dataset& train_data, const Dataset& test_data) {
  if (train_data.subtask != 1 || test_data.subtask != 1) throw Error("mean-grade baseline is a Subtask 1 baseline");
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& h : train_data.headlines) {
    if (h.mean_grade) {
      sum += *h.mean_grade;
      ++n;
    }
  }
  if (n == 0) throw Error("no graded training headlines");
  const double mean = sum / static_cast<double>(n);
  std::vector<double> pred, truth;
  for (const auto& h : test_data.headlines) {
    if (!h.mean_grade) continue;
    pred.push_back(mean);
    truth.push_back(*h.mean_grade);
  }
  if (truth.empty()) throw Error("no graded test headlines");
  MetricsReport r;
  r.subtask = 1;
  r.task1 = evaluate_task1(pred, truth);
  return r;
}

MetricsReport majority_label_baseline(const Dataset& train_data, const Dataset& test_data) {
  if (train_data.subtask != 2 || test_data.subtask != 2) throw Error("majority-label baseline is a Subtask 2 baseline");
  std::size_t ones = 0, twos = 0;
  for (const auto& p : train_data.pairs) {
    if (p.label == 1) ++ones;
    if (p.label == 2) ++twos;
  }
  const int majority = twos > ones ? 2 : 1;
  std::vector<int> gold, predicted;
  std::vector<double> z1, z2;
  for (const auto& p : test_data.pairs) {
    if (!p.label) continue;
    gold.push_back(*p.label);
    predicted.push_back(majority);
    z1.push_back(p.first.mean_grade.value_or(0.0));
    z2.push_back(p.second.mean_grade.value_or(0.0));
  }
  if (gold.empty()) throw Error("no labeled test pairs");
  MetricsReport r;
  r.subtask = 2;
  Task2Metrics m;
  m.n_pairs = gold.size();
  m.accuracy = accuracy(gold, predicted);
  m.n_evaluated = static_cast<std::size_t>(std::count_if(gold.begin(), gold.end(), [](int y) { return y != 0; }));
  m.reward = reward(gold, predicted, z1, z2);
  r.task2 = m;
  return r;
}

}  // namespace humor
