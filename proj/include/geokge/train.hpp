#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "geokge/exec.hpp"
#include "geokge/features.hpp"
#include "geokge/kernels.hpp"
#include "geokge/kg.hpp"
#include "geokge/model.hpp"
#include "geokge/rng.hpp"

namespace geokge {

struct TrainConfig {
  std::size_t k = 200;
  double gamma = 0.01;
  double lr = 0.01;
  std::size_t neg_rate = 5;
  std::size_t epochs = 1000;
  std::size_t batch_size = 512;
  double adversarial_temperature = 1.0;
  double align_weight = 1.0;
  FeatureKindSet enabled_kinds;
  std::uint64_t seed = 0;
  /// Reserved for HAKE's mixture-bias term; only `false` is accepted.
  bool mixture_bias = false;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
  bool alignment_active() const { return !enabled_kinds.empty() && align_weight > 0.0; }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// `key = value` text; unknown keys are rejected.
TrainConfig parse_train_config(std::string_view text, std::string_view source = "<config>");
TrainConfig read_train_config(const std::filesystem::path& path);
std::string format_train_config(const TrainConfig& cfg);

struct SamplerStats {
  std::size_t retry_exhausted = 0;
  std::size_t empty_alignment_vocab = 0;
};

inline constexpr int kNegativeRetries = 10;

/// Corrupts head or tail (fair coin) with a uniform entity, rejecting known-true
/// triples and the positive itself up to kNegativeRetries times per negative.
std::vector<Triple> sample_triplet_negatives(const Triple& positive, std::size_t n,
                                             std::size_t n_entities, const FilterIndex& known,
                                             Rng& rng, SamplerStats& stats);

/// Replaces the category with a uniformly drawn different category of the same kind.
std::vector<std::uint32_t> sample_alignment_negatives(const AlignmentPair& pair, std::size_t n,
                                                      std::size_t vocab_size, Rng& rng,
                                                      SamplerStats& stats);

struct NsaLoss {
  double loss = 0.0;
  double d_positive = 0.0;
  std::vector<double> d_negatives;
  std::vector<double> weights;
};

/// -log s(gamma - d+) - sum_j p_j log s(d-_j - gamma) with p = softmax(-temperature * d-)
/// held constant in the derivative.
NsaLoss nsa_loss(double d_positive, std::span<const double> d_negatives, double gamma,
                 double temperature);
/// Same loss with caller-supplied negative weights (used to hold p fixed).
double nsa_loss_with_weights(double d_positive, std::span<const double> d_negatives,
                             std::span<const double> weights, double gamma);

/// Dense gradient buffer shaped like an EmbeddingSpace that remembers touched rows.
class GradientBuffer {
 public:
  explicit GradientBuffer(const ModelShape& shape);

  void add(const SparseGrad& g);
  void clear();

  Table& table(TableId id) { return grads_[static_cast<std::size_t>(id)]; }
  const Table& table(TableId id) const { return grads_[static_cast<std::size_t>(id)]; }
  const std::vector<std::uint32_t>& touched(TableId id) const {
    return touched_[static_cast<std::size_t>(id)];
  }
  /// Marks a row touched without adding anything (its gradient stays zero).
  void touch(TableId id, std::uint32_t row);

  double d_lambda_triplet = 0.0;
  double d_lambda_align = 0.0;

 private:
  std::array<Table, kNumTables> grads_;
  std::array<std::vector<std::uint8_t>, kNumTables> marks_;
  std::array<std::vector<std::uint32_t>, kNumTables> touched_;
};

struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  explicit AdamState(const ModelShape& shape);

  std::array<Table, kNumTables> m;
  std::array<Table, kNumTables> v;
  double m_lambda_triplet = 0.0, v_lambda_triplet = 0.0;
  double m_lambda_align = 0.0, v_lambda_align = 0.0;
  std::uint64_t step = 0;
};

/// Bias-corrected Adam on touched rows only; lambdas clamped to >= 0 afterwards.
/// Throws TrainingError on a non-finite gradient.
void adam_step(EmbeddingSpace& es, const GradientBuffer& grads, AdamState& state, double lr);

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainData {
  std::size_t n_entities = 0;
  std::size_t n_relations = 0;
  std::array<std::size_t, 3> feature_sizes = {1, 1, 1};
  std::vector<Triple> train;
  std::vector<AlignmentPair> alignment;
};

struct EpochLoss {
  std::size_t epoch = 0;
  double triplet = 0.0;
  double alignment = 0.0;
};

struct TrainResult {
  EmbeddingSpace params;
  std::vector<EpochLoss> curve;
  SamplerStats stats;
  std::string rng_digest;
  /// Every recorded batch loss was finite.
  bool all_losses_finite = true;
};

struct TrainOptions {
  Exec exec = Exec::Parallel;
  std::function<void(const EpochLoss&)> on_epoch;
  /// Called after every Adam step (used by invariant tests).
  std::function<void(const EmbeddingSpace&)> on_step;
};

TrainResult train(const TrainData& data, const TrainConfig& cfg, const TrainOptions& opts = {});

struct Checkpoint {
  TrainConfig config;
  EmbeddingSpace params;
  std::uint32_t epoch = 0;
  std::uint64_t entity_digest = 0;
  std::uint64_t relation_digest = 0;
  std::string rng_digest;
};

/// Binary parameters at `path`; config snapshot and digests at `<path>.meta`.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// Throws DataError when the checkpoint's dimensions differ from `expected`.
void check_checkpoint_shape(const Checkpoint& ckpt, const ModelShape& expected);

std::filesystem::path checkpoint_meta_path(const std::filesystem::path& path);

}  // namespace geokge
