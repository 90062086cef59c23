#include "pdgnn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "pdgnn/rng.hpp"

namespace pdgnn {

namespace {

const char* pooling_name(Pooling p) { return p == Pooling::Average ? "average" : "max"; }
const char* direction_name(DirectionMode d) {
  return d == DirectionMode::Directed ? "directed" : "undirected";
}

}  // namespace

std::vector<Split> stratified_kfold(const std::vector<int>& labels, int folds, int repeats,
                                    std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("stratified_kfold: folds must be >= 2");
  if (repeats < 1) throw std::invalid_argument("stratified_kfold: repeats must be >= 1");

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] == 1 ? pos : neg).push_back(i);
  }
  if (pos.size() < static_cast<std::size_t>(folds) || neg.size() < static_cast<std::size_t>(folds)) {
    throw std::invalid_argument("stratified_kfold: a class has fewer members than folds");
  }

  std::vector<Split> splits;
  splits.reserve(static_cast<std::size_t>(folds) * repeats);
  for (int r = 0; r < repeats; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r) + 1));
    auto p = pos;
    auto n = neg;
    rng.shuffle(p);
    rng.shuffle(n);

    // Deal both classes round-robin so every fold keeps the class ratio.
    std::vector<std::vector<std::size_t>> fold_members(static_cast<std::size_t>(folds));
    for (std::size_t i = 0; i < p.size(); ++i) fold_members[i % folds].push_back(p[i]);
    for (std::size_t i = 0; i < n.size(); ++i) fold_members[i % folds].push_back(n[i]);

    for (int f = 0; f < folds; ++f) {
      Split s;
      s.test = fold_members[static_cast<std::size_t>(f)];
      std::sort(s.test.begin(), s.test.end());
      for (int other = 0; other < folds; ++other) {
        if (other == f) continue;
        const auto& m = fold_members[static_cast<std::size_t>(other)];
        s.train.insert(s.train.end(), m.begin(), m.end());
      }
      std::sort(s.train.begin(), s.train.end());
      splits.push_back(std::move(s));
    }
  }
  return splits;
}

TrainResult train_on(const std::vector<PreparedGraph>& items,
                     const std::vector<std::size_t>& indices, const TrainConfig& cfg,
                     std::uint64_t seed) {
  if (indices.empty()) throw std::invalid_argument("train: empty training set");
  for (std::size_t idx : indices) {
    if (idx >= items.size()) throw std::out_of_range("train: index out of range");
  }

  ModelConfig mc;
  mc.d_in = kFeatureDim;
  mc.hidden = cfg.hidden;
  mc.cheb_order = cfg.cheb_order;
  mc.pooling = cfg.pooling;
  mc.seed = derive_seed(seed, 0x6d6f64656cULL);

  TrainResult result;
  result.model = Model::init(mc);
  result.batches_per_epoch =
      (indices.size() + static_cast<std::size_t>(cfg.batch_size) - 1) /
      static_cast<std::size_t>(cfg.batch_size);

  AdamState adam(result.model.parameters());
  AdamConfig adam_cfg;
  adam_cfg.lr = cfg.learning_rate;

  Rng shuffle_rng(derive_seed(seed, 0x7368756666ULL));
  std::vector<std::size_t> order = indices;

  auto params = result.model.parameters();
  auto grads = result.model.gradients();

  ModelCache cache;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const double inv_batch = 1.0 / static_cast<double>(end - start);

      result.model.zero_grads();
      for (std::size_t i = start; i < end; ++i) {
        const PreparedGraph& g = items[order[i]];
        Eigen::Vector2d probs = result.model.forward(g.op, g.features, &cache);
        epoch_sum += cross_entropy(probs(1), g.label);
        result.model.backward(g.op, cache, g.label, inv_batch);
      }
      adam.step(params, grads, adam_cfg);
    }
    result.epoch_loss.push_back(epoch_sum / static_cast<double>(order.size()));
  }
  return result;
}

TrainResult train(const std::vector<PreparedGraph>& items, const TrainConfig& cfg) {
  std::vector<std::size_t> all(items.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return train_on(items, all, cfg, cfg.seed);
}

Metrics metrics_from_counts(const ConfusionCounts& c) {
  Metrics m;
  if (c.tp + c.fp > 0) {
    m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  } else {
    m.precision_defined = false;
  }
  if (c.tp + c.fn > 0) {
    m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  } else {
    m.recall_defined = false;
  }
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1_defined = false;
  }
  const std::size_t total = c.total();
  m.accuracy = total ? static_cast<double>(c.tp + c.tn) / static_cast<double>(total) : 0.0;
  return m;
}

ConfusionCounts count_confusion(const std::vector<int>& labels,
                                const std::vector<int>& predictions) {
  if (labels.size() != predictions.size()) {
    throw std::invalid_argument("count_confusion: size mismatch");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool actual = labels[i] == 1;
    const bool predicted = predictions[i] == 1;
    if (predicted && actual) ++c.tp;
    else if (predicted && !actual) ++c.fp;
    else if (!predicted && actual) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Evaluation evaluate(const Model& model, const std::vector<PreparedGraph>& items,
                    const std::vector<std::size_t>& indices, double threshold) {
  if (indices.empty()) throw std::invalid_argument("evaluate: empty test set");
  std::vector<int> labels, predictions;
  labels.reserve(indices.size());
  predictions.reserve(indices.size());
  for (std::size_t idx : indices) {
    const PreparedGraph& g = items.at(idx);
    Eigen::Vector2d probs = model.forward(g.op, g.features);
    labels.push_back(g.label);
    predictions.push_back(probs(1) >= threshold ? 1 : 0);
  }
  Evaluation ev;
  ev.counts = count_confusion(labels, predictions);
  ev.metrics = metrics_from_counts(ev.counts);
  return ev;
}

namespace {

Aggregate aggregate_of(const std::vector<double>& xs) {
  Aggregate a;
  if (xs.empty()) return a;
  double sum = 0.0;
  for (double x : xs) sum += x;
  a.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - a.mean) * (x - a.mean);
    a.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return a;
}

CvSummary summarize(const std::vector<FoldOutcome>& folds) {
  std::vector<double> p, r, f, acc;
  for (const auto& fo : folds) {
    p.push_back(fo.metrics.precision);
    r.push_back(fo.metrics.recall);
    f.push_back(fo.metrics.f1);
    acc.push_back(fo.metrics.accuracy);
  }
  return {aggregate_of(p), aggregate_of(r), aggregate_of(f), aggregate_of(acc)};
}

}  // namespace

CvReport run_cross_validation(const Dataset& ds, const TrainConfig& cfg) {
  CvReport report;
  report.config = cfg;
  report.k = ds.k;
  report.dataset_size = ds.items.size();

  const std::vector<PreparedGraph> prepared = prepare_dataset(ds);
  std::vector<int> labels;
  labels.reserve(prepared.size());
  for (const auto& g : prepared) labels.push_back(g.label);

  const auto splits =
      stratified_kfold(labels, cfg.folds, cfg.repeats, derive_seed(cfg.seed, 0x666f6c6473ULL));
  report.folds.resize(splits.size());

  // Fold-runs are independent; each gets a derived seed and writes only its
  // own slot, so the report does not depend on scheduling.
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= splits.size()) return;
      const int repeat = static_cast<int>(i) / cfg.folds;
      const int fold = static_cast<int>(i) % cfg.folds;
      const std::uint64_t fold_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(repeat) + 1,
                                                  static_cast<std::uint64_t>(fold) + 1);
      TrainResult tr = train_on(prepared, splits[i].train, cfg, fold_seed);
      Evaluation ev = evaluate(tr.model, prepared, splits[i].test, cfg.threshold);
      report.folds[i] = FoldOutcome{repeat, fold, ev.counts, ev.metrics,
                                    tr.epoch_loss.empty() ? 0.0 : tr.epoch_loss.back()};
    }
  };

  unsigned jobs = cfg.jobs > 0 ? static_cast<unsigned>(cfg.jobs)
                               : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(splits.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  report.summary = summarize(report.folds);
  return report;
}

GridReport run_experiment_grid(const TransactionGraph& g, const TrainConfig& base,
                               const std::string& axis) {
  GridReport grid;
  grid.axis = axis;

  // One dataset seed for the whole grid, so rows differ only on the axis.
  const std::uint64_t ds_seed = derive_seed(base.seed, 0x64617461736574ULL);

  auto run_with_dataset = [&](const std::string& value, const TrainConfig& cfg) {
    Dataset ds = build_dataset(g, cfg.strategy, ds_seed);
    grid.rows.push_back({value, run_cross_validation(ds, cfg)});
  };

  if (axis == "sampling") {
    for (auto rank : {EdgeAttribute::Amount, EdgeAttribute::Count}) {
      for (auto weight : {EdgeAttribute::Amount, EdgeAttribute::Count}) {
        TrainConfig cfg = base;
        cfg.strategy.rank_attribute = rank;
        cfg.strategy.weight_attribute = weight;
        run_with_dataset(cfg.strategy.name(), cfg);
      }
    }
  } else if (axis == "directivity") {
    for (auto dir : {DirectionMode::Directed, DirectionMode::Undirected}) {
      TrainConfig cfg = base;
      cfg.strategy.direction = dir;
      run_with_dataset(direction_name(dir), cfg);
    }
  } else if (axis == "pooling") {
    Dataset ds = build_dataset(g, base.strategy, ds_seed);
    for (auto mode : {Pooling::Average, Pooling::Max}) {
      TrainConfig cfg = base;
      cfg.pooling = mode;
      grid.rows.push_back({pooling_name(mode), run_cross_validation(ds, cfg)});
    }
  } else if (axis == "hidden_dim") {
    Dataset ds = build_dataset(g, base.strategy, ds_seed);
    for (int hidden : {16, 32, 64, 128, 256}) {
      TrainConfig cfg = base;
      cfg.hidden = hidden;
      grid.rows.push_back({std::to_string(hidden), run_cross_validation(ds, cfg)});
    }
  } else {
    throw ConfigError("unknown experiment axis: " + axis +
                      " (expected sampling, directivity, pooling or hidden_dim)");
  }
  return grid;
}

namespace {

nlohmann::json json_of(const TrainConfig& cfg) {
  return {
      {"epochs", cfg.epochs},
      {"batch_size", cfg.batch_size},
      {"folds", cfg.folds},
      {"repeats", cfg.repeats},
      {"hidden", cfg.hidden},
      {"cheb_order", cfg.cheb_order},
      {"pooling", pooling_name(cfg.pooling)},
      {"strategy",
       {{"name", cfg.strategy.name()},
        {"rank", cfg.strategy.rank_attribute == EdgeAttribute::Amount ? "a" : "t"},
        {"weight", cfg.strategy.weight_attribute == EdgeAttribute::Amount ? "a" : "t"},
        {"hops", cfg.strategy.hops},
        {"direction", direction_name(cfg.strategy.direction)}}},
      {"seed", cfg.seed},
      {"learning_rate", cfg.learning_rate},
      {"threshold", cfg.threshold},
  };
}

nlohmann::json json_of(const Metrics& m) {
  return {
      {"precision", m.precision},
      {"recall", m.recall},
      {"f1", m.f1},
      {"accuracy", m.accuracy},
      {"precision_defined", m.precision_defined},
      {"recall_defined", m.recall_defined},
      {"f1_defined", m.f1_defined},
  };
}

nlohmann::json json_of(const Aggregate& a) {
  return {{"mean", a.mean}, {"stddev", a.stddev}};
}

nlohmann::json json_of(const CvReport& report) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : report.folds) {
    nlohmann::json j = json_of(f.metrics);
    j["repeat"] = f.repeat;
    j["fold"] = f.fold;
    j["final_loss"] = f.final_loss;
    j["counts"] = {{"tp", f.counts.tp}, {"fp", f.counts.fp}, {"fn", f.counts.fn}, {"tn", f.counts.tn}};
    folds.push_back(std::move(j));
  }
  return {
      {"config", json_of(report.config)},
      {"k", report.k},
      {"dataset_size", report.dataset_size},
      {"folds", std::move(folds)},
      {"aggregate",
       {{"precision", json_of(report.summary.precision)},
        {"recall", json_of(report.summary.recall)},
        {"f1", json_of(report.summary.f1)},
        {"accuracy", json_of(report.summary.accuracy)}}},
  };
}

void table_header(std::ostringstream& out) {
  out << std::left << std::setw(10) << "row" << std::right << std::setw(12) << "Precision"
      << std::setw(12) << "Recall" << std::setw(12) << "Accuracy" << std::setw(12) << "F1-score"
      << '\n';
}

void table_row(std::ostringstream& out, const std::string& name, double p, double r, double acc,
               double f1) {
  out << std::left << std::setw(10) << name << std::right << std::fixed << std::setprecision(4)
      << std::setw(12) << p << std::setw(12) << r << std::setw(12) << acc << std::setw(12) << f1
      << '\n';
}

}  // namespace

std::string report_to_json(const CvReport& report) { return json_of(report).dump(2) + "\n"; }

std::string report_to_json(const GridReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"value", row.value}, {"report", json_of(row.report)}});
  }
  return nlohmann::json{{"axis", report.axis}, {"rows", std::move(rows)}}.dump(2) + "\n";
}

std::string report_to_table(const CvReport& report) {
  std::ostringstream out;
  out << "strategy=" << report.config.strategy.name() << " direction="
      << direction_name(report.config.strategy.direction) << " k=" << report.k
      << " subgraphs=" << report.dataset_size << " folds=" << report.config.folds << "x"
      << report.config.repeats << '\n';
  table_header(out);
  for (const auto& f : report.folds) {
    table_row(out, std::to_string(f.repeat) + "/" + std::to_string(f.fold), f.metrics.precision,
              f.metrics.recall, f.metrics.accuracy, f.metrics.f1);
  }
  table_row(out, "mean", report.summary.precision.mean, report.summary.recall.mean,
            report.summary.accuracy.mean, report.summary.f1.mean);
  table_row(out, "stddev", report.summary.precision.stddev, report.summary.recall.stddev,
            report.summary.accuracy.stddev, report.summary.f1.stddev);
  return out.str();
}

std::string report_to_table(const GridReport& report) {
  std::ostringstream out;
  out << "axis: " << report.axis << '\n';
  table_header(out);
  for (const auto& row : report.rows) {
    table_row(out, row.value, row.report.summary.precision.mean, row.report.summary.recall.mean,
              row.report.summary.accuracy.mean, row.report.summary.f1.mean);
  }
  return out.str();
}

}  // namespace pdgnn
