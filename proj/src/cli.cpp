#include "geokge/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

#include "geokge/error.hpp"
#include "geokge/eval.hpp"
#include "geokge/features.hpp"
#include "geokge/geometry.hpp"
#include "geokge/kg.hpp"
#include "geokge/synth.hpp"
#include "geokge/text_io.hpp"
#include "geokge/train.hpp"

namespace geokge {

namespace {

namespace fs = std::filesystem;

struct Options {
  // synth
  GenConfig gen;
  // shared paths
  std::string triples, geoms, out, split_dir, feature_file, checkpoint, config_file;
  // build-features
  int dis_bins = 20;
  bool lonlat = false;
  // split
  std::string ratio = "87:3:10";
  std::uint64_t split_seed = 0;
  bool dedup = false;
  // train
  TrainConfig train;
  std::string features = "";
  bool serial = false;
  // evaluate / predict
  std::string filter = "all";
  std::string on = "test";
  bool full_precision = false;
  std::string head, relation, tail;
  std::size_t top_k = 5;
};

void write_header(const fs::path& dir, const std::string& command,
                  const std::vector<std::string>& args, const std::string& extra) {
  fs::create_directories(dir);
  std::ostringstream os;
  os << "# geokge run header\n"
     << "command = " << command << '\n'
     << "version = " << kVersion << '\n'
     << "threads = " << max_threads() << '\n'
     << "argv =";
  for (const auto& a : args) os << ' ' << a;
  os << '\n' << extra;
  write_file(dir / "run.header", os.str());
}

SplitRatio parse_ratio(const std::string& text) {
  SplitRatio r;
  char c1 = 0, c2 = 0;
  std::istringstream is(text);
  if (!(is >> r.train >> c1 >> r.valid >> c2 >> r.test) || c1 != ':' || c2 != ':' ||
      !is.eof()) {
    throw InvalidArgument("--ratio must look like 87:3:10");
  }
  return r;
}

std::vector<const std::vector<Triple>*> filter_splits(const std::string& mode,
                                                      const SplitDataset& s) {
  if (mode == "all") return {&s.train, &s.valid, &s.test};
  if (mode == "train-only") return {&s.train};
  throw InvalidArgument("--filter must be 'all' or 'train-only'");
}

void check_vocab(const Checkpoint& ck, const SplitManifest& m) {
  if (ck.entity_digest != m.entities.digest() || ck.relation_digest != m.relations.digest()) {
    throw DataError("checkpoint vocabulary does not match the split manifest");
  }
}

ModelShape shape_for(const SplitManifest& m, const std::optional<PairFeatures>& pf, std::size_t k) {
  ModelShape s;
  s.entities = m.entities.size();
  s.relations = m.relations.size();
  s.k = k;
  if (pf) {
    for (auto kind : kAllFeatureKinds) {
      s.features[static_cast<int>(kind)] = std::max<std::size_t>(1, pf->categories(kind).size());
    }
  }
  return s;
}

int cmd_synth(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  auto ds = generate(o.gen);
  write_synth_dataset(o.out, ds);
  std::ostringstream extra;
  extra << "seed = " << o.gen.seed << "\nentities = " << o.gen.n_entities
        << "\ntriples = " << o.gen.n_triples << "\nterms = " << o.gen.n_relation_terms
        << "\nnoise = " << format_exact(o.gen.noise_rate) << "\nextent = " << format_exact(o.gen.extent) << '\n';
  for (std::size_t a = 0; a < kNumArchetypes; ++a) {
    extra << "archetype_" << archetype_name(static_cast<Archetype>(a)) << " = "
          << ds.archetype_counts[a] << '\n';
  }
  write_header(o.out, "synth", args, extra.str());
  out << "wrote " << ds.geometries.size() << " geometries and " << ds.triples.size()
      << " triples to " << o.out << '\n';
  for (std::size_t a = 0; a < kNumArchetypes; ++a) {
    if (ds.archetype_counts[a] == 0) {
      out << "warning: archetype '" << archetype_name(static_cast<Archetype>(a))
          << "' could not be satisfied\n";
    }
  }
  return kExitOk;
}

int cmd_build_features(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  auto kg = ingest_triples(o.triples);
  auto named = read_geometry_file(o.geoms);
  Projection proj;
  if (o.lonlat) {
    std::vector<Geometry> gs;
    for (const auto& g : named) gs.push_back(g.geometry);
    proj = {ProjectionMode::Equirectangular, mean_latitude(gs)};
    for (auto& g : named) g.geometry = project(g.geometry, proj);
  }
  auto geoms = geometries_by_id(kg.entities, named);
  auto pf = extract_pair_features(kg.triples, kg.entities, geoms, o.dis_bins, o.serial ? Exec::Serial : Exec::Parallel);
  fs::create_directories(o.out);
  write_features(fs::path(o.out) / "features.tsv", pf, kg.entities);
  std::ostringstream extra;
  extra << "dis_bins = " << o.dis_bins << "\nprojection = "
        << (o.lonlat ? "equirectangular" : "planar") << "\nref_lat = " << format_exact(proj.ref_lat_deg)
        << "\npairs = " << pf.pairs.size() << "\ntopo_categories = "
        << pf.categories(FeatureKind::Topo).size() << "\ndis_classes = " << pf.breaks.classes << '\n';
  write_header(o.out, "build-features", args, extra.str());
  out << "pairs: " << pf.pairs.size() << "  topology patterns: "
      << pf.categories(FeatureKind::Topo).size() << "  distance classes: " << pf.breaks.classes
      << '\n';
  if (pf.breaks.reduced) {
    out << "warning: only " << pf.breaks.classes << " distinct distances; requested " << o.dis_bins
        << " classes\n";
  }
  for (const auto& name : pf.missing_entities) out << "warning: no geometry for '" << name << "'\n";
  return kExitOk;
}

int cmd_split(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  const SplitRatio ratio = parse_ratio(o.ratio);
  IngestOptions io;
  io.dedup = o.dedup;
  auto kg = ingest_triples(o.triples, {}, {}, io);
  auto split = split_dataset(kg.triples, ratio, o.split_seed);
  write_split_manifest(o.out, split, kg.entities, kg.relations);
  std::ostringstream extra;
  extra << "ratio = " << o.ratio << "\nseed = " << o.split_seed << "\ndedup = " << o.dedup << '\n';
  write_header(o.out, "split", args, extra.str());
  out << "train " << split.train.size() << "  valid " << split.valid.size() << "  test "
      << split.test.size() << '\n';
  return kExitOk;
}

int cmd_train(Options o, const std::vector<std::string>& args, std::ostream& out,
              const CLI::App& sub) {
  TrainConfig cfg = o.config_file.empty() ? TrainConfig{} : read_train_config(o.config_file);
  // Explicit flags override the config file.
  auto given = [&sub](const char* flag) { return sub.count(flag) > 0; };
  if (given("--k")) cfg.k = o.train.k;
  if (given("--gamma")) cfg.gamma = o.train.gamma;
  if (given("--lr")) cfg.lr = o.train.lr;
  if (given("--neg-rate")) cfg.neg_rate = o.train.neg_rate;
  if (given("--epochs")) cfg.epochs = o.train.epochs;
  if (given("--batch")) cfg.batch_size = o.train.batch_size;
  if (given("--align-weight")) cfg.align_weight = o.train.align_weight;
  if (given("--adv-temp")) cfg.adversarial_temperature = o.train.adversarial_temperature;
  if (given("--seed")) cfg.seed = o.train.seed;
  if (given("--features")) cfg.enabled_kinds = FeatureKindSet::parse(o.features);
  cfg.validate();

  auto m = read_split_manifest(o.split_dir);
  std::optional<PairFeatures> pf;
  if (!o.feature_file.empty()) pf = read_features(o.feature_file, m.entities);
  if (!cfg.enabled_kinds.empty() && !pf) {
    throw InvalidArgument("--features=" + cfg.enabled_kinds.str() + " needs --feature-file");
  }

  TrainData data;
  data.n_entities = m.entities.size();
  data.n_relations = m.relations.size();
  data.feature_sizes = shape_for(m, pf, cfg.k).features;
  data.train = m.split.train;
  std::size_t skipped = 0;
  if (pf) data.alignment = build_alignment_pairs(data.train, *pf, cfg.enabled_kinds, &skipped);

  TrainOptions topts;
  topts.exec = o.serial ? Exec::Serial : Exec::Parallel;
  topts.on_epoch = [&out, &cfg](const EpochLoss& e) {
    if (e.epoch == 1 || e.epoch % 10 == 0 || e.epoch == cfg.epochs) {
      out << "epoch " << e.epoch << "  triplet_loss " << e.triplet << "  align_loss "
          << e.alignment << '\n';
    }
  };
  auto res = train(data, cfg, topts);

  fs::create_directories(o.out);
  Checkpoint ck{cfg, res.params, static_cast<std::uint32_t>(cfg.epochs), m.entities.digest(),
                m.relations.digest(), res.rng_digest};
  save_checkpoint(ck, fs::path(o.out) / "model.ckpt");
  std::ostringstream curve;
  curve << "epoch\ttriplet_loss\talign_loss\n";
  for (const auto& e : res.curve) {
    curve << e.epoch << '\t' << format_exact(e.triplet) << '\t' << format_exact(e.alignment) << '\n';
  }
  write_file(fs::path(o.out) / "loss_curve.tsv", curve.str());
  std::ostringstream extra;
  extra << format_train_config(cfg) << "alignment_pairs = " << data.alignment.size()
        << "\nalignment_skipped_triples = " << skipped
        << "\nnegative_retry_exhausted = " << res.stats.retry_exhausted
        << "\nrng_digest = " << res.rng_digest << '\n';
  write_header(o.out, "train", args, extra.str());
  if (res.stats.retry_exhausted) {
    out << "warning: " << res.stats.retry_exhausted
        << " negatives accepted after exhausting rejection retries\n";
  }
  return kExitOk;
}

int cmd_evaluate(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  auto m = read_split_manifest(o.split_dir);
  auto ck = load_checkpoint(o.checkpoint);
  check_vocab(ck, m);
  const std::vector<Triple>* part = nullptr;
  if (o.on == "test") {
    part = &m.split.test;
  } else if (o.on == "valid") {
    part = &m.split.valid;
  } else {
    throw InvalidArgument("--on must be 'test' or 'valid'");
  }
  auto filter = build_filter_index(filter_splits(o.filter, m.split));
  auto metrics = evaluate_split(ck.params, *part, filter, o.serial ? Exec::Serial : Exec::Parallel);
  const std::string tsv = format_metrics_tsv(metrics, o.full_precision);
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    write_file(fs::path(o.out) / "metrics.tsv", tsv);
    std::ostringstream extra;
    extra << "checkpoint = " << o.checkpoint << "\nsplit = " << o.split_dir << "\non = " << o.on
          << "\nfilter = " << o.filter << '\n'
          << format_train_config(ck.config);
    write_header(o.out, "evaluate", args, extra.str());
  }
  out << tsv;
  return kExitOk;
}

int cmd_predict(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  auto m = read_split_manifest(o.split_dir);
  auto ck = load_checkpoint(o.checkpoint);
  check_vocab(ck, m);
  const int given = !o.head.empty() + !o.relation.empty() + !o.tail.empty();
  if (given != 2) throw InvalidArgument("give exactly two of --head, --relation, --tail");
  Slot slot = o.head.empty() ? Slot::Head : o.tail.empty() ? Slot::Tail : Slot::Relation;
  Triple partial;
  if (!o.head.empty()) partial.h = m.entities.at(o.head);
  if (!o.relation.empty()) partial.r = m.relations.at(o.relation);
  if (!o.tail.empty()) partial.t = m.entities.at(o.tail);
  auto filter = build_filter_index(filter_splits(o.filter, m.split));
  auto preds = predict_topk(ck.params, slot, partial, o.top_k, filter);
  const Vocabulary& names = slot == Slot::Relation ? m.relations : m.entities;

  std::ostringstream report;
  report << "# ";
  if (slot != Slot::Head) report << "h: " << o.head << "  ";
  if (slot != Slot::Relation) report << "r: " << o.relation << "  ";
  if (slot != Slot::Tail) report << "t: " << o.tail;
  report << '\n' << format_prediction_tsv(preds, names);
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    write_file(fs::path(o.out) / "predictions.tsv", report.str());
    write_header(o.out, "predict", args,
                 "checkpoint = " + o.checkpoint + "\nk = " + std::to_string(o.top_k) + '\n');
  }
  out << report.str();
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Geometry-aware knowledge graph embedding and link prediction", "geokge"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  auto* synth = app.add_subcommand("synth", "generate a synthetic spatial knowledge graph");
  synth->add_option("--out", o.out, "output directory")->required();
  synth->add_option("--seed", o.gen.seed, "generator seed");
  synth->add_option("--entities", o.gen.n_entities, "number of entities");
  synth->add_option("--triples", o.gen.n_triples, "number of triples");
  synth->add_option("--terms", o.gen.n_relation_terms, "number of relation terms");
  synth->add_option("--noise", o.gen.noise_rate, "fraction of triples with a random term");
  synth->add_option("--extent", o.gen.extent, "side length of the square world");

  auto* bf = app.add_subcommand("build-features", "compute topology/direction/distance features");
  bf->add_option("--triples", o.triples, "triple file")->required();
  bf->add_option("--geoms", o.geoms, "geometry file")->required();
  bf->add_option("--dis-bins", o.dis_bins, "natural-breaks distance classes");
  bf->add_flag("--lonlat", o.lonlat, "coordinates are lon/lat degrees; project equirectangularly");
  bf->add_flag("--serial", o.serial, "use the serial reference kernels");
  bf->add_option("--out", o.out, "output directory")->required();

  auto* sp = app.add_subcommand("split", "split triples into train/valid/test");
  sp->add_option("--triples", o.triples, "triple file")->required();
  sp->add_option("--ratio", o.ratio, "train:valid:test percentages");
  sp->add_option("--seed", o.split_seed, "shuffle seed");
  sp->add_flag("--dedup", o.dedup, "drop duplicate triples");
  sp->add_option("--out", o.out, "output directory")->required();

  auto* tr = app.add_subcommand("train", "train embeddings");
  tr->add_option("--split", o.split_dir, "split manifest directory")->required();
  tr->add_option("--feature-file", o.feature_file, "features.tsv from build-features");
  tr->add_option("--config", o.config_file, "key = value config file");
  tr->add_option("--features", o.features, "enabled feature kinds, e.g. topo,dir,dis");
  tr->add_option("--k", o.train.k, "embedding dimension");
  tr->add_option("--gamma", o.train.gamma, "margin");
  tr->add_option("--lr", o.train.lr, "Adam learning rate");
  tr->add_option("--neg-rate", o.train.neg_rate, "negatives per positive");
  tr->add_option("--epochs", o.train.epochs, "epochs");
  tr->add_option("--batch", o.train.batch_size, "batch size");
  tr->add_option("--align-weight", o.train.align_weight, "weight of the alignment loss");
  tr->add_option("--adv-temp", o.train.adversarial_temperature, "self-adversarial temperature");
  tr->add_option("--seed", o.train.seed, "seed");
  tr->add_flag("--serial", o.serial, "use the serial reference kernels");
  tr->add_option("--out", o.out, "output directory")->required();

  auto* ev = app.add_subcommand("evaluate", "filtered link-prediction metrics");
  ev->add_option("--checkpoint", o.checkpoint, "model checkpoint")->required();
  ev->add_option("--split", o.split_dir, "split manifest directory")->required();
  ev->add_option("--on", o.on, "test or valid");
  ev->add_option("--filter", o.filter, "all or train-only");
  ev->add_flag("--full-precision", o.full_precision, "print metrics at full precision");
  ev->add_flag("--serial", o.serial, "use the serial reference kernels");
  ev->add_option("--out", o.out, "output directory");

  auto* pr = app.add_subcommand("predict", "top-k predictions for a partial triple");
  pr->add_option("--checkpoint", o.checkpoint, "model checkpoint")->required();
  pr->add_option("--split", o.split_dir, "split manifest directory")->required();
  pr->add_option("--head", o.head, "head entity name");
  pr->add_option("--relation", o.relation, "relation term");
  pr->add_option("--tail", o.tail, "tail entity name");
  pr->add_option("--k", o.top_k, "number of predictions");
  pr->add_option("--filter", o.filter, "all or train-only");
  pr->add_option("--out", o.out, "output directory");

  // "--features=" (empty list, the baseline) would otherwise swallow the next token.
  std::vector<std::string> reversed;
  for (auto it = args.rbegin(); it != args.rend(); ++it) {
    reversed.push_back(*it == "--features=" ? std::string("--features=none") : *it);
  }
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(o, args, out);
    if (bf->parsed()) return cmd_build_features(o, args, out);
    if (sp->parsed()) return cmd_split(o, args, out);
    if (tr->parsed()) return cmd_train(o, args, out, *tr);
    if (ev->parsed()) return cmd_evaluate(o, args, out);
    if (pr->parsed()) return cmd_predict(o, args, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const TrainingError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace geokge
