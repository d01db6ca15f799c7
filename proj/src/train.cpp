#include "geokge/train.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "geokge/error.hpp"
#include "geokge/text_io.hpp"

namespace geokge {

// ---- config -----------------------------------------------------------------------

void TrainConfig::validate() const {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be > 0");
  if (!(lr > 0.0)) throw InvalidArgument("lr must be > 0");
  if (neg_rate < 1) throw InvalidArgument("neg_rate must be >= 1");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (!(align_weight >= 0.0)) throw InvalidArgument("align_weight must be >= 0");
  if (!(adversarial_temperature >= 0.0)) {
    throw InvalidArgument("adversarial temperature must be >= 0");
  }
  if (mixture_bias) throw InvalidArgument("mixture_bias is reserved and not implemented");
}

TrainConfig parse_train_config(std::string_view text, std::string_view source) {
  TrainConfig cfg;
  for (const auto& [key, value] : parse_key_values(text, source)) {
    auto as_size = [&]() -> std::size_t {
      std::size_t used = 0;
      unsigned long long v = std::stoull(value, &used);
      if (used != value.size() || value.front() == '-') {
        throw DataError(std::string(source) + ": '" + key + "' needs a non-negative integer");
      }
      return static_cast<std::size_t>(v);
    };
    if (key == "k") {
      cfg.k = as_size();
    } else if (key == "gamma") {
      cfg.gamma = parse_double(value);
    } else if (key == "lr") {
      cfg.lr = parse_double(value);
    } else if (key == "neg_rate") {
      cfg.neg_rate = as_size();
    } else if (key == "epochs") {
      cfg.epochs = as_size();
    } else if (key == "batch_size") {
      cfg.batch_size = as_size();
    } else if (key == "adversarial_temperature") {
      cfg.adversarial_temperature = parse_double(value);
    } else if (key == "align_weight") {
      cfg.align_weight = parse_double(value);
    } else if (key == "features") {
      cfg.enabled_kinds = FeatureKindSet::parse(value);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(as_size());
    } else if (key == "mixture_bias") {
      if (value != "true" && value != "false") {
        throw DataError(std::string(source) + ": 'mixture_bias' needs true or false");
      }
      cfg.mixture_bias = value == "true";
    } else {
      throw DataError(std::string(source) + ": unknown config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

TrainConfig read_train_config(const std::filesystem::path& path) {
  return parse_train_config(read_file(path), path.string());
}

std::string format_train_config(const TrainConfig& cfg) {
  std::ostringstream os;
  os << "k = " << cfg.k << '\n'
     << "gamma = " << format_exact(cfg.gamma) << '\n'
     << "lr = " << format_exact(cfg.lr) << '\n'
     << "neg_rate = " << cfg.neg_rate << '\n'
     << "epochs = " << cfg.epochs << '\n'
     << "batch_size = " << cfg.batch_size << '\n'
     << "adversarial_temperature = " << format_exact(cfg.adversarial_temperature) << '\n'
     << "align_weight = " << format_exact(cfg.align_weight) << '\n'
     << "features = " << cfg.enabled_kinds.str() << '\n'
     << "seed = " << cfg.seed << '\n'
     << "mixture_bias = " << (cfg.mixture_bias ? "true" : "false") << '\n';
  return os.str();
}

// ---- sampling ---------------------------------------------------------------------

std::vector<Triple> sample_triplet_negatives(const Triple& positive, std::size_t n,
                                             std::size_t n_entities, const FilterIndex& known,
                                             Rng& rng, SamplerStats& stats) {
  if (n_entities < 2) throw InvalidArgument("negative sampling needs at least 2 entities");
  std::vector<Triple> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    Triple cand = positive;
    for (int attempt = 0;; ++attempt) {
      cand = positive;
      auto e = static_cast<EntityId>(rng.below(n_entities));
      if (rng.coin()) {
        cand.h = e;
      } else {
        cand.t = e;
      }
      if (!(cand == positive) && !known.contains(cand)) break;
      if (attempt + 1 >= kNegativeRetries) {
        ++stats.retry_exhausted;
        break;
      }
    }
    out.push_back(cand);
  }
  return out;
}

std::vector<std::uint32_t> sample_alignment_negatives(const AlignmentPair& pair, std::size_t n,
                                                      std::size_t vocab_size, Rng& rng,
                                                      SamplerStats& stats) {
  std::vector<std::uint32_t> out;
  if (vocab_size < 2) {
    ++stats.empty_alignment_vocab;
    return out;
  }
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto g = static_cast<std::uint32_t>(rng.below(vocab_size - 1));
    if (g >= pair.g) ++g;
    out.push_back(g);
  }
  return out;
}

// ---- loss -------------------------------------------------------------------------

namespace {

/// log(sigmoid(x)) without overflow.
double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double nsa_loss_with_weights(double d_positive, std::span<const double> d_negatives,
                             std::span<const double> weights, double gamma) {
  double loss = -log_sigmoid(gamma - d_positive);
  for (std::size_t j = 0; j < d_negatives.size(); ++j) {
    loss -= weights[j] * log_sigmoid(d_negatives[j] - gamma);
  }
  return loss;
}

NsaLoss nsa_loss(double d_positive, std::span<const double> d_negatives, double gamma,
                 double temperature) {
  if (d_negatives.empty()) throw InvalidArgument("nsa_loss needs at least one negative");
  NsaLoss out;
  const std::size_t n = d_negatives.size();
  out.weights.resize(n);
  double lo = *std::min_element(d_negatives.begin(), d_negatives.end());
  double z = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out.weights[j] = std::exp(-temperature * (d_negatives[j] - lo));
    z += out.weights[j];
  }
  for (auto& w : out.weights) w /= z;

  out.loss = nsa_loss_with_weights(d_positive, d_negatives, out.weights, gamma);
  out.d_positive = sigmoid(d_positive - gamma);
  out.d_negatives.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.d_negatives[j] = -out.weights[j] * sigmoid(gamma - d_negatives[j]);
  }
  return out;
}

// ---- optimizer --------------------------------------------------------------------

GradientBuffer::GradientBuffer(const ModelShape& shape) {
  const std::array<std::size_t, kNumTables> rows = {
      shape.entities,    shape.entities,    shape.relations,   shape.relations,
      shape.features[0], shape.features[0], shape.features[1], shape.features[1],
      shape.features[2], shape.features[2]};
  for (std::size_t i = 0; i < kNumTables; ++i) {
    grads_[i] = Table(rows[i], shape.k);
    marks_[i].assign(rows[i], 0);
  }
}

void GradientBuffer::touch(TableId id, std::uint32_t row) {
  auto i = static_cast<std::size_t>(id);
  if (!marks_[i][row]) {
    marks_[i][row] = 1;
    touched_[i].push_back(row);
  }
}

void GradientBuffer::add(const SparseGrad& g) {
  for (const auto& r : g.rows()) {
    touch(r.table, r.row);
    auto dst = grads_[static_cast<std::size_t>(r.table)].row(r.row);
    auto src = g.values(r);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  d_lambda_triplet += g.d_lambda_triplet;
  d_lambda_align += g.d_lambda_align;
}

void GradientBuffer::clear() {
  for (std::size_t t = 0; t < kNumTables; ++t) {
    for (auto row : touched_[t]) {
      auto r = grads_[t].row(row);
      std::fill(r.begin(), r.end(), 0.0);
      marks_[t][row] = 0;
    }
    touched_[t].clear();
  }
  d_lambda_triplet = d_lambda_align = 0.0;
}

AdamState::AdamState(const ModelShape& shape) {
  GradientBuffer shaped(shape);
  for (std::size_t i = 0; i < kNumTables; ++i) {
    const auto& t = shaped.table(static_cast<TableId>(i));
    m[i] = Table(t.rows(), t.cols());
    v[i] = Table(t.rows(), t.cols());
  }
}

namespace {

void adam_scalar(double& param, double g, double& m, double& v, double lr, double c1, double c2) {
  m = AdamState::kBeta1 * m + (1.0 - AdamState::kBeta1) * g;
  v = AdamState::kBeta2 * v + (1.0 - AdamState::kBeta2) * g * g;
  param -= lr * (m / c1) / (std::sqrt(v / c2) + AdamState::kEps);
}

}  // namespace

void adam_step(EmbeddingSpace& es, const GradientBuffer& grads, AdamState& state, double lr) {
  for (std::size_t t = 0; t < kNumTables; ++t) {
    const auto id = static_cast<TableId>(t);
    for (auto row : grads.touched(id)) {
      for (double g : grads.table(id).row(row)) {
        if (!std::isfinite(g)) {
          throw TrainingError("non-finite gradient in table " + std::to_string(t) + " row " +
                              std::to_string(row) + " at step " + std::to_string(state.step + 1));
        }
      }
    }
  }
  if (!std::isfinite(grads.d_lambda_triplet) || !std::isfinite(grads.d_lambda_align)) {
    throw TrainingError("non-finite lambda gradient at step " + std::to_string(state.step + 1));
  }

  ++state.step;
  const double c1 = 1.0 - std::pow(AdamState::kBeta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(AdamState::kBeta2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < kNumTables; ++t) {
    const auto id = static_cast<TableId>(t);
    for (auto row : grads.touched(id)) {
      auto p = es.table(id).row(row);
      auto g = grads.table(id).row(row);
      auto m = state.m[t].row(row);
      auto v = state.v[t].row(row);
      for (std::size_t i = 0; i < p.size(); ++i) adam_scalar(p[i], g[i], m[i], v[i], lr, c1, c2);
    }
  }
  adam_scalar(es.lambda_triplet, grads.d_lambda_triplet, state.m_lambda_triplet,
              state.v_lambda_triplet, lr, c1, c2);
  adam_scalar(es.lambda_align, grads.d_lambda_align, state.m_lambda_align, state.v_lambda_align,
              lr, c1, c2);
  es.lambda_triplet = std::max(0.0, es.lambda_triplet);
  es.lambda_align = std::max(0.0, es.lambda_align);
}

// ---- training loop ----------------------------------------------------------------

namespace {

/// Draws indices proportional to weight via inverse-CDF on a cumulative table.
class WeightedSampler {
 public:
  explicit WeightedSampler(std::span<const AlignmentPair> pairs) {
    double acc = 0.0;
    cdf_.reserve(pairs.size());
    for (const auto& p : pairs) {
      acc += p.weight;
      cdf_.push_back(acc);
    }
  }
  std::size_t draw(Rng& rng) const {
    double u = rng.unit() * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace

TrainResult train(const TrainData& data, const TrainConfig& cfg, const TrainOptions& opts) {
  cfg.validate();
  if (data.train.empty()) throw InvalidArgument("training split is empty");
  ModelShape shape{data.n_entities, data.n_relations, data.feature_sizes, cfg.k};
  for (const auto& t : data.train) {
    if (t.h >= shape.entities || t.t >= shape.entities || t.r >= shape.relations) {
      throw InvalidArgument("training triple references an id outside the vocabulary");
    }
  }
  for (const auto& p : data.alignment) {
    if (p.r >= shape.relations || p.g >= shape.features[static_cast<int>(p.kind)]) {
      throw InvalidArgument("alignment pair references an id outside the vocabulary");
    }
  }

  TrainResult res{init_params(shape, cfg.seed), {}, {}, {}, true};
  EmbeddingSpace& es = res.params;
  AdamState adam(shape);
  GradientBuffer grads(shape);
  // The parameter initializer and the sampler use separate streams so that the
  // same seed gives the same starting point for every feature configuration.
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<AlignmentPair> active_copy;
  if (cfg.alignment_active()) {
    for (const auto& p : data.alignment) {
      if (cfg.enabled_kinds.contains(p.kind)) active_copy.push_back(p);
    }
  }
  const bool use_alignment = !active_copy.empty();
  WeightedSampler sampler(use_alignment ? std::span<const AlignmentPair>(active_copy)
                                        : std::span<const AlignmentPair>());

  const FilterIndex known = build_filter_index({&data.train});
  const std::size_t n_train = data.train.size();
  std::vector<std::size_t> order(n_train);
  for (std::size_t i = 0; i < n_train; ++i) order[i] = i;

  std::vector<TripletExample> tbatch;
  std::vector<AlignmentExample> abatch;
  std::vector<std::size_t> align_draws;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = n_train - 1; i > 0; --i) {
      std::swap(order[i], order[static_cast<std::size_t>(rng.below(i + 1))]);
    }
    align_draws.clear();
    if (use_alignment) {
      for (std::size_t i = 0; i < n_train; ++i) align_draws.push_back(sampler.draw(rng));
    }

    double triplet_sum = 0.0;
    double align_sum = 0.0;
    std::size_t align_count = 0;
    for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
      const std::size_t end = std::min(n_train, start + cfg.batch_size);
      tbatch.clear();
      for (std::size_t i = start; i < end; ++i) {
        const Triple& pos = data.train[order[i]];
        tbatch.push_back({pos, sample_triplet_negatives(pos, cfg.neg_rate, shape.entities, known,
                                                        rng, res.stats)});
      }
      abatch.clear();
      if (use_alignment) {
        for (std::size_t i = start; i < end; ++i) {
          const AlignmentPair& p = active_copy[align_draws[i]];
          abatch.push_back({p.r, p.kind, p.g,
                            sample_alignment_negatives(
                                p, cfg.neg_rate, shape.features[static_cast<int>(p.kind)], rng,
                                res.stats)});
        }
      }

      const double tscale = 1.0 / static_cast<double>(tbatch.size());
      auto tres = triplet_example_grads(es, tbatch, cfg.gamma, cfg.adversarial_temperature, tscale,
                                        opts.exec);
      double batch_t = 0.0;
      for (const auto& r : tres) {
        grads.add(r.grad);
        batch_t += r.loss;
      }
      triplet_sum += batch_t;
      if (!std::isfinite(batch_t)) res.all_losses_finite = false;

      if (!abatch.empty()) {
        const double ascale = cfg.align_weight / static_cast<double>(abatch.size());
        auto ares = alignment_example_grads(es, abatch, cfg.gamma, cfg.adversarial_temperature,
                                            ascale, opts.exec);
        double batch_a = 0.0;
        for (const auto& r : ares) {
          grads.add(r.grad);
          batch_a += r.loss;
        }
        align_sum += batch_a;
        align_count += abatch.size();
        if (!std::isfinite(batch_a)) res.all_losses_finite = false;
      }

      adam_step(es, grads, adam, cfg.lr);
      grads.clear();
      if (opts.on_step) opts.on_step(es);
    }

    EpochLoss el{epoch, triplet_sum / static_cast<double>(n_train),
                 align_count ? align_sum / static_cast<double>(align_count) : 0.0};
    res.curve.push_back(el);
    if (opts.on_epoch) opts.on_epoch(el);
  }
  res.rng_digest = rng.digest();
  return res;
}

// ---- checkpoint -------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'G', 'E', 'O', 'K', 'G', 'E', '0', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
  auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string where) : b_(bytes), where_(std::move(where)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<unsigned char>(b_[pos_ + i])} << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<unsigned char>(b_[pos_ + i])} << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw DataError(where_ + ": truncated checkpoint");
  }
  std::string_view b_;
  std::string where_;
  std::size_t pos_ = 0;
};

}  // namespace

std::filesystem::path checkpoint_meta_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".meta";
  return p;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto& es = ckpt.params;
  std::string out(kMagic, kMagic + 8);
  put_u32(out, static_cast<std::uint32_t>(es.shape.k));
  put_u32(out, static_cast<std::uint32_t>(es.shape.entities));
  put_u32(out, static_cast<std::uint32_t>(es.shape.relations));
  for (auto f : es.shape.features) put_u32(out, static_cast<std::uint32_t>(f));
  put_u32(out, ckpt.epoch);
  for (const auto& t : es.tables) {
    for (double v : t.data()) put_f64(out, v);
  }
  put_f64(out, es.lambda_triplet);
  put_f64(out, es.lambda_align);
  write_file(path, out);

  std::ostringstream meta;
  meta << format_train_config(ckpt.config) << "entity_digest = " << hex64(ckpt.entity_digest)
       << '\n'
       << "relation_digest = " << hex64(ckpt.relation_digest) << '\n'
       << "rng_digest = " << ckpt.rng_digest << '\n';
  write_file(checkpoint_meta_path(path), meta.str());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  ByteReader rd(bytes, path.string());
  if (rd.bytes(8) != std::string_view(kMagic, 8)) {
    throw DataError(path.string() + ": not a checkpoint or unsupported version (bad magic)");
  }
  Checkpoint ck;
  ModelShape shape;
  shape.k = rd.u32();
  shape.entities = rd.u32();
  shape.relations = rd.u32();
  for (auto& f : shape.features) f = rd.u32();
  ck.epoch = rd.u32();
  if (shape.k < 1 || shape.entities < 1 || shape.relations < 1) {
    throw DataError(path.string() + ": invalid checkpoint dimensions");
  }
  // Size check before allocation so a corrupt header cannot request huge tables.
  std::size_t rows = 2 * (shape.entities + shape.relations);
  for (auto f : shape.features) rows += 2 * f;
  if ((bytes.size() - 36) / 8 < rows * shape.k + 2) {
    throw DataError(path.string() + ": truncated checkpoint");
  }

  ck.params = init_params(shape, 0);
  for (auto& t : ck.params.tables) {
    for (auto& v : t.data()) v = rd.f64();
  }
  ck.params.lambda_triplet = rd.f64();
  ck.params.lambda_align = rd.f64();
  if (!rd.at_end()) throw DataError(path.string() + ": trailing bytes after checkpoint");

  auto meta_path = checkpoint_meta_path(path);
  auto kv = read_key_values(meta_path);
  auto take = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw DataError(meta_path.string() + ": missing '" + key + "'");
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  ck.entity_digest = std::stoull(take("entity_digest"), nullptr, 16);
  ck.relation_digest = std::stoull(take("relation_digest"), nullptr, 16);
  ck.rng_digest = take("rng_digest");
  std::ostringstream rest;
  for (const auto& [k, v] : kv) rest << k << " = " << v << '\n';
  ck.config = parse_train_config(rest.str(), meta_path.string());
  if (ck.config.k != shape.k) {
    throw DataError(path.string() + ": config k does not match the stored tables");
  }
  return ck;
}

void check_checkpoint_shape(const Checkpoint& ckpt, const ModelShape& expected) {
  const auto& s = ckpt.params.shape;
  auto mismatch = [](const char* what, std::size_t got, std::size_t want) {
    throw DataError(std::string("checkpoint dimension mismatch: ") + what + " is " +
                    std::to_string(got) + ", expected " + std::to_string(want));
  };
  if (s.k != expected.k) mismatch("k", s.k, expected.k);
  if (s.entities != expected.entities) mismatch("entity count", s.entities, expected.entities);
  if (s.relations != expected.relations) mismatch("relation count", s.relations, expected.relations);
  for (int i = 0; i < 3; ++i) {
    if (s.features[i] != expected.features[i]) {
      mismatch("feature vocabulary size", s.features[i], expected.features[i]);
    }
  }
}

}  // namespace geokge
