#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "humor/backends.hpp"
#include "humor/checkpoint.hpp"
#include "humor/config.hpp"
#include "humor/corpus.hpp"
#include "humor/encoders.hpp"
#include "humor/metrics.hpp"
#include "humor/model.hpp"

namespace humor {

// One split of either subtask.
struct Dataset {
  int subtask = 1;
  std::vector<HeadlineInstance> headlines;  // subtask 1
  std::vector<PairInstance> pairs;          // subtask 2

  std::size_t size() const { return subtask == 1 ? headlines.size() : pairs.size(); }
  // Every headline of the split, pair members flattened in order.
  std::vector<HeadlineInstance> all_headlines() const;
};

Dataset load_dataset(const std::filesystem::path& csv_path, int subtask);
Dataset merge_extra(Dataset train, const Dataset& extra);

// File locations of one subtask's splits.
struct DataPaths {
  std::filesystem::path train;
  std::filesystem::path dev;
  std::filesystem::path test;
  std::filesystem::path extra;

  // <root>/subtask-<n>/{train,dev,test,train_funlines}.csv
  static DataPaths released_layout(const std::filesystem::path& root, int subtask);
};

// Shared, read-only encoder inputs. The backend factory yields a fresh
// instance so finetuning never touches another run's weights.
struct Resources {
  std::shared_ptr<const EmbeddingTable> table;
  std::function<std::unique_ptr<EncoderBackend>()> backend_factory;
};

// Loads what `config.encoder` needs. The embedding file is filtered to the
// vocabulary of `vocabulary_sources`.
Resources load_resources(const ExperimentConfig& config, const std::vector<const Dataset*>& vocabulary_sources,
                         const std::filesystem::path& backend_dir = default_backend_dir());

// A headline with its triple and every feature that does not depend on
// trainable state already computed.
struct PreparedHeadline {
  std::optional<double> gold;
  SentenceTriple triple;
  // Table path: row per span word (nullopt = OOV); context excludes the mask.
  std::vector<std::optional<std::size_t>> edit_rows;
  std::vector<std::optional<std::size_t>> original_rows;
  std::vector<std::optional<std::size_t>> context_rows;
  SpanEmbeddings frozen;  // table + Freeze
  // Contextual path.
  ContextualInputs inputs;
  Matrix edit_layers;  // Freeze: span means per layer, d x (L+1)
  Matrix original_layers;
  Matrix mask_layers;
};

// Encoder + fusion + head for one experiment configuration.
class FunninessModel {
 public:
  FunninessModel(const ExperimentConfig& config, const Resources& resources);

  const ExperimentConfig& config() const { return config_; }
  std::size_t width() const { return d_; }
  const EncoderBackend* backend() const { return backend_.get(); }
  const ScalarMix* mix() const { return mix_ ? &*mix_ : nullptr; }
  ScoreHead& head() { return head_; }

  PreparedHeadline prepare(const HeadlineInstance& instance) const;
  std::vector<PreparedHeadline> prepare_all(const std::vector<HeadlineInstance>& instances) const;

  struct Tape {
    SpanEmbeddings spans;
    ScoreHead::Trace head;
    LayerStack edited;
    LayerStack original;
    LayerStack context;
  };

  SpanEmbeddings encode(const PreparedHeadline& item, Tape* tape = nullptr) const;
  double forward(const PreparedHeadline& item, Tape* tape = nullptr) const;
  // Accumulates gradients of every trainable parameter for d(loss)/dz.
  void backward(const PreparedHeadline& item, const Tape& tape, double grad_z);
  // Score as reported (clamped to [0,3] when the config asks for it).
  double predict(const PreparedHeadline& item) const;

  std::vector<NamedTensor> parameters();
  void zero_grad();

  Checkpoint snapshot() const;
  void restore(const Checkpoint& checkpoint);

 private:
  ExperimentConfig config_;
  std::shared_ptr<const EmbeddingTable> table_;
  std::unique_ptr<EncoderBackend> backend_;
  std::size_t d_ = 0;
  std::optional<ScalarMix> mix_;
  std::optional<Tensor> table_weights_;  // table + Finetune
  ScoreHead head_;

  Vector table_vector(const std::optional<std::size_t>& row) const;
};

struct ValidationEvent {
  std::size_t epoch = 0;          // 1-based
  std::size_t step_in_epoch = 0;  // steps completed in this epoch
  std::size_t global_step = 0;
  double train_loss = 0.0;        // mean batch loss since the previous event
  MetricsReport dev;
};

struct RunRecord {
  ExperimentConfig config;
  std::string config_hash;
  std::vector<ValidationEvent> history;
  std::size_t best_index = 0;
  Checkpoint best;
  std::optional<MetricsReport> test;

  double best_value() const;  // selection metric at best_index
  nlohmann::json to_json() const;
};

// Selection value of a report: dev RMSE (Subtask 1) or dev accuracy (Subtask 2).
std::optional<double> selection_metric(const MetricsReport& report);
bool improves(int subtask, const std::optional<double>& candidate, const std::optional<double>& incumbent);

// Steps (1-based, within an epoch of `steps_per_epoch` steps) after which the
// dev set is evaluated: floor(k*S/3) for k = 1..3.
std::vector<std::size_t> validation_steps(std::size_t steps_per_epoch);

double scheduled_learning_rate(const ExperimentConfig& config, std::size_t step, std::size_t total_steps);

struct TrainOptions {
  std::function<void(const ValidationEvent&)> on_validation;
  bool verbose = false;
};

RunRecord train(const ExperimentConfig& config, const Dataset& train_data, const Dataset& dev_data,
                const Resources& resources, const TrainOptions& options = {});

MetricsReport evaluate(const FunninessModel& model, const Dataset& split);
MetricsReport evaluate(const Checkpoint& checkpoint, const Dataset& split, const Resources& resources);

// Per-headline scores for Subtask 1 data, or (z1, z2) per pair for Subtask 2.
std::vector<double> predict_scores(const FunninessModel& model, const std::vector<HeadlineInstance>& headlines);

// Writes "id,pred": scores for Subtask 1, labels in {1,2} for Subtask 2.
void export_predictions(const Checkpoint& checkpoint, const std::filesystem::path& input_csv,
                        const std::filesystem::path& output_path, const Resources& resources);
void write_predictions(const FunninessModel& model, const Dataset& data, std::ostream& out);

// Training-mean grade for every instance / the majority non-tie label.
MetricsReport mean_grade_baseline(const Dataset& train_data, const Dataset& test_data);
MetricsReport majority_label_baseline(const Dataset& train_data, const Dataset& test_data);

}  // namespace humor
