#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pdgnn/nn.hpp"
#include "pdgnn/sampler.hpp"

namespace pdgnn {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 32;
  int folds = 5;
  int repeats = 5;
  int hidden = 128;
  int cheb_order = 3;
  Pooling pooling = Pooling::Average;
  SamplingStrategy strategy;
  std::uint64_t seed = 42;
  double learning_rate = 1e-3;
  double threshold = 0.5;
  int jobs = 0;  // parallel fold-runs; 0 = hardware concurrency
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Class-stratified repeated k-fold splits, `repeats * folds` of them,
// ordered by (repeat, fold). Throws when a class has fewer members than
// folds. Deterministic given seed.
std::vector<Split> stratified_kfold(const std::vector<int>& labels, int folds, int repeats,
                                    std::uint64_t seed);

struct TrainResult {
  Model model;
  std::vector<double> epoch_loss;  // mean batch loss per epoch
  std::size_t batches_per_epoch = 0;
};

// Seeded mini-batch training with Adam. Deterministic given (items, indices,
// cfg, seed). Throws on an empty training set.
TrainResult train_on(const std::vector<PreparedGraph>& items,
                     const std::vector<std::size_t>& indices, const TrainConfig& cfg,
                     std::uint64_t seed);

// Trains on all items with cfg.seed.
TrainResult train(const std::vector<PreparedGraph>& items, const TrainConfig& cfg);

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  // Division-by-zero cases yield 0 and drop the flag.
  bool precision_defined = true;
  bool recall_defined = true;
  bool f1_defined = true;
};

Metrics metrics_from_counts(const ConfusionCounts& c);

// Tally (label, prediction) pairs; the counting path behind evaluate.
ConfusionCounts count_confusion(const std::vector<int>& labels,
                                const std::vector<int>& predictions);

struct Evaluation {
  ConfusionCounts counts;
  Metrics metrics;
};

// Prediction = phishing iff p_phishing >= threshold.
Evaluation evaluate(const Model& model, const std::vector<PreparedGraph>& items,
                    const std::vector<std::size_t>& indices, double threshold = 0.5);

struct FoldOutcome {
  int repeat = 0;
  int fold = 0;
  ConfusionCounts counts;
  Metrics metrics;
  double final_loss = 0.0;
};

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample stddev over fold-runs
};

struct CvSummary {
  Aggregate precision;
  Aggregate recall;
  Aggregate f1;
  Aggregate accuracy;
};

struct CvReport {
  TrainConfig config;
  int k = 0;  // neighbor budget of the dataset
  std::size_t dataset_size = 0;
  std::vector<FoldOutcome> folds;
  CvSummary summary;
};

// Repeated stratified CV over a prepared dataset. Fold-runs execute
// concurrently with derived per-fold seeds; the report is ordered
// canonically, so output is independent of scheduling.
CvReport run_cross_validation(const Dataset& ds, const TrainConfig& cfg);

struct GridRow {
  std::string value;
  CvReport report;
};

struct GridReport {
  std::string axis;
  std::vector<GridRow> rows;
};

// Parameter studies: axis is one of sampling (a-a/a-t/t-a/t-t), directivity
// (directed/undirected), pooling (average/max), hidden_dim (16..256).
// Dataset-shaping axes rebuild the dataset per row; model axes reuse it.
GridReport run_experiment_grid(const TransactionGraph& g, const TrainConfig& base,
                               const std::string& axis);

std::string report_to_json(const CvReport& report);
std::string report_to_json(const GridReport& report);
// Plain-text metric table, one row per fold-run plus the aggregate row.
std::string report_to_table(const CvReport& report);
std::string report_to_table(const GridReport& report);

}  // namespace pdgnn
