// Command-line driver: ingest -> lighten -> sample -> train/evaluate,
// plus the parameter-study grids.

#include <CLI11.hpp>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "pdgnn/harness.hpp"
#include "pdgnn/ingest.hpp"
#include "pdgnn/lightweight.hpp"
#include "pdgnn/nn.hpp"
#include "pdgnn/rng.hpp"
#include "pdgnn/sampler.hpp"

#include <json.hpp>

namespace {

using namespace pdgnn;

EdgeAttribute attr_of(const std::string& s) {
  return s == "a" ? EdgeAttribute::Amount : EdgeAttribute::Count;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << content;
}

// Mutable mirror of TrainConfig with string-typed enums for CLI11 binding.
struct TrainOptions {
  TrainConfig cfg;
  std::string pooling = "average";
  std::string rank = "t";
  std::string weight = "t";
  std::string direction = "undirected";
  std::string config_path;
  CLI::App* cmd = nullptr;

  // Precedence: defaults < config file < command-line flags < PDGNN_SEED.
  TrainConfig resolve() {
    if (!config_path.empty()) apply_config_file();
    TrainConfig out = cfg;
    out.pooling = pooling == "max" ? Pooling::Max : Pooling::Average;
    out.strategy.rank_attribute = attr_of(rank);
    out.strategy.weight_attribute = attr_of(weight);
    out.strategy.direction =
        direction == "directed" ? DirectionMode::Directed : DirectionMode::Undirected;
    if (const char* env = std::getenv("PDGNN_SEED")) {
      out.seed = std::stoull(env);  // global override
    }
    return out;
  }

 private:
  void apply_config_file() {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config file: " + config_path);

    auto flag_given = [this](const char* flag) { return cmd && cmd->count(flag) > 0; };
    auto enum_value = [](const std::string& key, const std::string& value,
                         std::initializer_list<const char*> allowed) {
      for (const char* a : allowed) {
        if (value == a) return value;
      }
      throw ConfigError("config key '" + key + "' has invalid value '" + value + "'");
    };

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::string_view sv(line);
      while (!sv.empty() && std::isspace(static_cast<unsigned char>(sv.front()))) sv.remove_prefix(1);
      while (!sv.empty() && std::isspace(static_cast<unsigned char>(sv.back()))) sv.remove_suffix(1);
      if (sv.empty() || sv.front() == '#') continue;
      const auto eq = sv.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
      }
      auto strip = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return std::string(s);
      };
      const std::string key = strip(sv.substr(0, eq));
      const std::string value = strip(sv.substr(eq + 1));
      try {
        if (key == "epochs") {
          if (!flag_given("--epochs")) cfg.epochs = std::stoi(value);
        } else if (key == "batch_size") {
          if (!flag_given("--batch-size")) cfg.batch_size = std::stoi(value);
        } else if (key == "folds") {
          if (!flag_given("--folds")) cfg.folds = std::stoi(value);
        } else if (key == "repeats") {
          if (!flag_given("--repeats")) cfg.repeats = std::stoi(value);
        } else if (key == "hidden") {
          if (!flag_given("--hidden")) cfg.hidden = std::stoi(value);
        } else if (key == "cheb_order") {
          if (!flag_given("--cheb-order")) cfg.cheb_order = std::stoi(value);
        } else if (key == "pooling") {
          if (!flag_given("--pooling")) pooling = enum_value(key, value, {"average", "max"});
        } else if (key == "rank") {
          if (!flag_given("--rank")) rank = enum_value(key, value, {"a", "t"});
        } else if (key == "weight") {
          if (!flag_given("--weight")) weight = enum_value(key, value, {"a", "t"});
        } else if (key == "hops") {
          if (!flag_given("--hops")) cfg.strategy.hops = std::stoi(value);
        } else if (key == "direction") {
          if (!flag_given("--direction")) {
            direction = enum_value(key, value, {"directed", "undirected"});
          }
        } else if (key == "seed") {
          if (!flag_given("--seed")) cfg.seed = std::stoull(value);
        } else if (key == "learning_rate") {
          if (!flag_given("--learning-rate")) cfg.learning_rate = std::stod(value);
        } else if (key == "threshold") {
          if (!flag_given("--threshold")) cfg.threshold = std::stod(value);
        } else if (key == "jobs") {
          if (!flag_given("--jobs")) cfg.jobs = std::stoi(value);
        } else {
          throw ConfigError("unknown config key '" + key + "'");
        }
      } catch (const std::invalid_argument&) {
        throw ConfigError("config key '" + key + "' has unparsable value '" + value + "'");
      } catch (const std::out_of_range&) {
        throw ConfigError("config key '" + key + "' value out of range: '" + value + "'");
      }
    }
  }
};

void add_train_options(CLI::App* cmd, TrainOptions& opt) {
  opt.cmd = cmd;
  cmd->add_option("--epochs", opt.cfg.epochs, "training epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--batch-size", opt.cfg.batch_size, "mini-batch size")->check(CLI::PositiveNumber);
  cmd->add_option("--folds", opt.cfg.folds, "cross-validation folds")->check(CLI::Range(2, 1000));
  cmd->add_option("--repeats", opt.cfg.repeats, "cross-validation repeats")->check(CLI::PositiveNumber);
  cmd->add_option("--hidden", opt.cfg.hidden, "hidden dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--cheb-order", opt.cfg.cheb_order, "Chebyshev polynomial order")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--pooling", opt.pooling, "readout: average|max")
      ->check(CLI::IsMember({"average", "max"}));
  cmd->add_option("--rank", opt.rank, "ranking attribute: a|t")->check(CLI::IsMember({"a", "t"}));
  cmd->add_option("--weight", opt.weight, "edge weight attribute: a|t")
      ->check(CLI::IsMember({"a", "t"}));
  cmd->add_option("--hops", opt.cfg.strategy.hops, "sampling hops")->check(CLI::PositiveNumber);
  cmd->add_option("--direction", opt.direction, "neighbor ranking mode: directed|undirected")
      ->check(CLI::IsMember({"directed", "undirected"}));
  cmd->add_option("--seed", opt.cfg.seed, "global RNG seed");
  cmd->add_option("--learning-rate", opt.cfg.learning_rate, "Adam learning rate");
  cmd->add_option("--threshold", opt.cfg.threshold, "decision threshold");
  cmd->add_option("--jobs", opt.cfg.jobs, "parallel fold-runs (0 = all cores)");
  cmd->add_option("--config", opt.config_path, "flat key=value config file; flags override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ethereum phishing-account detection via ego-subgraph Chebyshev GCN"};
  app.require_subcommand(1);

  // ingest
  std::string tx_path, label_path, out_path;
  std::string delimiter = ",";
  auto* ingest = app.add_subcommand("ingest", "build a graph snapshot from raw records");
  ingest->add_option("--transactions", tx_path, "CSV with header from,to,value,timestamp")
      ->required();
  ingest->add_option("--labels", label_path, "one phishing address per line");
  ingest->add_option("--output", out_path, "graph snapshot path")->required();
  ingest->add_option("--delimiter", delimiter, "field delimiter (default ,)");
  ingest->callback([&]() {
    CsvFormat fmt;
    if (delimiter.size() != 1) throw ConfigError("delimiter must be a single character");
    fmt.delimiter = delimiter[0];
    auto records = parse_transactions_file(tx_path, fmt);
    LabelSet labels;
    if (!label_path.empty()) labels = parse_labels_file(label_path);
    TransactionGraph g = build_graph(records, labels);
    save_snapshot_file(g, out_path);
    std::cout << "nodes=" << g.node_count() << " edges=" << g.edge_count()
              << " phishing=" << g.phishing_count() << " -> " << out_path << "\n";
  });

  // lighten
  std::string light_in, light_out, start_account;
  std::size_t scale = 0;
  std::uint64_t light_seed = 0;
  auto* lighten = app.add_subcommand(
      "lighten", "1-hop neighborhood of labeled seeds, largest component, random-walk rescale");
  lighten->add_option("--input", light_in, "graph snapshot")->required();
  lighten->add_option("--scale", scale, "target node count")->required();
  lighten->add_option("--seed", light_seed, "walk RNG seed");
  lighten->add_option("--start", start_account, "start account (default: random phishing node)");
  lighten->add_option("--output", light_out, "rescaled snapshot path")->required();
  lighten->callback([&]() {
    TransactionGraph g = load_snapshot_file(light_in);
    if (g.phishing_count() > 0) {
      std::vector<std::string> seeds;
      for (std::uint32_t idx : g.phishing_nodes()) seeds.push_back(g.account(idx));
      g = first_order_neighborhood(g, LabelSet(std::move(seeds)));
    } else {
      std::cerr << "warning: no labeled accounts, skipping seed neighborhood stage\n";
    }
    g = largest_wcc(g);
    RescaleConfig cfg;
    cfg.target_scale = scale;
    cfg.rng_seed = light_seed;
    if (const char* env = std::getenv("PDGNN_SEED")) cfg.rng_seed = std::stoull(env);
    if (!start_account.empty()) cfg.start_account = start_account;
    g = random_walk_rescale(g, cfg);
    save_snapshot_file(g, light_out);
    std::cout << "nodes=" << g.node_count() << " edges=" << g.edge_count()
              << " phishing=" << g.phishing_count() << " -> " << light_out << "\n";
  });

  // sample
  std::string sample_in, sample_out;
  TrainOptions sample_opt;
  auto* sample = app.add_subcommand("sample", "extract the labeled ego-subgraph dataset");
  sample->add_option("--input", sample_in, "graph snapshot")->required();
  sample->add_option("--output", sample_out, "dataset path")->required();
  sample->add_option("--rank", sample_opt.rank, "ranking attribute: a|t")
      ->check(CLI::IsMember({"a", "t"}));
  sample->add_option("--weight", sample_opt.weight, "edge weight attribute: a|t")
      ->check(CLI::IsMember({"a", "t"}));
  sample->add_option("--hops", sample_opt.cfg.strategy.hops, "sampling hops")
      ->check(CLI::PositiveNumber);
  sample->add_option("--direction", sample_opt.direction, "directed|undirected")
      ->check(CLI::IsMember({"directed", "undirected"}));
  sample->add_option("--seed", sample_opt.cfg.seed, "negative-sampling seed");
  sample->callback([&]() {
    TransactionGraph g = load_snapshot_file(sample_in);
    TrainConfig cfg = sample_opt.resolve();
    Dataset ds = build_dataset(g, cfg.strategy, derive_seed(cfg.seed, 0x64617461736574ULL));
    save_dataset_file(ds, sample_out);
    std::cout << "strategy=" << ds.strategy.name() << " k=" << ds.k
              << " subgraphs=" << ds.items.size() << " -> " << sample_out << "\n";
  });

  // train
  std::string train_ds, ckpt_out, train_report;
  TrainOptions train_opt;
  auto* train_cmd = app.add_subcommand("train", "train one model on a full dataset");
  train_cmd->add_option("--dataset", train_ds, "dataset file")->required();
  train_cmd->add_option("--checkpoint", ckpt_out, "model checkpoint path")->required();
  train_cmd->add_option("--report", train_report, "JSON report path");
  add_train_options(train_cmd, train_opt);
  train_cmd->callback([&]() {
    Dataset ds = load_dataset_file(train_ds);
    TrainConfig cfg = train_opt.resolve();
    cfg.strategy = ds.strategy;  // dataset defines its own sampling strategy
    auto prepared = prepare_dataset(ds);
    TrainResult tr = train(prepared, cfg);
    save_checkpoint_file(tr.model, ckpt_out);

    std::vector<std::size_t> all(prepared.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    Evaluation ev = evaluate(tr.model, prepared, all, cfg.threshold);

    nlohmann::json j = {
        {"dataset", {{"strategy", ds.strategy.name()}, {"k", ds.k}, {"subgraphs", ds.items.size()}}},
        {"epochs", cfg.epochs},
        {"batch_size", cfg.batch_size},
        {"hidden", cfg.hidden},
        {"cheb_order", cfg.cheb_order},
        {"seed", cfg.seed},
        {"batches_per_epoch", tr.batches_per_epoch},
        {"loss_history", tr.epoch_loss},
        {"final_loss", tr.epoch_loss.empty() ? 0.0 : tr.epoch_loss.back()},
        {"train_metrics",
         {{"precision", ev.metrics.precision},
          {"recall", ev.metrics.recall},
          {"f1", ev.metrics.f1},
          {"accuracy", ev.metrics.accuracy}}},
    };
    if (!train_report.empty()) write_text_file(train_report, j.dump(2) + "\n");
    std::cout << "final_loss=" << (tr.epoch_loss.empty() ? 0.0 : tr.epoch_loss.back())
              << " train_acc=" << ev.metrics.accuracy << " -> " << ckpt_out << "\n";
  });

  // evaluate
  std::string eval_ckpt, eval_ds, eval_report;
  double eval_threshold = 0.5;
  auto* eval_cmd = app.add_subcommand("evaluate", "score a checkpoint against a dataset");
  eval_cmd->add_option("--checkpoint", eval_ckpt, "model checkpoint")->required();
  eval_cmd->add_option("--dataset", eval_ds, "dataset file")->required();
  eval_cmd->add_option("--threshold", eval_threshold, "decision threshold");
  eval_cmd->add_option("--report", eval_report, "JSON report path");
  eval_cmd->callback([&]() {
    Model model = load_checkpoint_file(eval_ckpt);
    Dataset ds = load_dataset_file(eval_ds);
    auto prepared = prepare_dataset(ds);
    std::vector<std::size_t> all(prepared.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    Evaluation ev = evaluate(model, prepared, all, eval_threshold);
    nlohmann::json j = {
        {"threshold", eval_threshold},
        {"counts",
         {{"tp", ev.counts.tp}, {"fp", ev.counts.fp}, {"fn", ev.counts.fn}, {"tn", ev.counts.tn}}},
        {"metrics",
         {{"precision", ev.metrics.precision},
          {"recall", ev.metrics.recall},
          {"f1", ev.metrics.f1},
          {"accuracy", ev.metrics.accuracy}}},
    };
    if (!eval_report.empty()) write_text_file(eval_report, j.dump(2) + "\n");
    std::cout << "precision=" << ev.metrics.precision << " recall=" << ev.metrics.recall
              << " accuracy=" << ev.metrics.accuracy << " f1=" << ev.metrics.f1 << "\n";
  });

  // cv: repeated stratified cross-validation on one dataset
  std::string cv_ds, cv_report;
  TrainOptions cv_opt;
  auto* cv_cmd = app.add_subcommand("cv", "repeated stratified k-fold cross-validation");
  cv_cmd->add_option("--dataset", cv_ds, "dataset file")->required();
  cv_cmd->add_option("--report", cv_report, "JSON report path");
  add_train_options(cv_cmd, cv_opt);
  cv_cmd->callback([&]() {
    Dataset ds = load_dataset_file(cv_ds);
    TrainConfig cfg = cv_opt.resolve();
    cfg.strategy = ds.strategy;
    CvReport report = run_cross_validation(ds, cfg);
    if (!cv_report.empty()) write_text_file(cv_report, report_to_json(report));
    std::cout << report_to_table(report);
  });

  // experiment
  std::string exp_in, exp_axis, exp_report;
  TrainOptions exp_opt;
  auto* exp_cmd = app.add_subcommand("experiment", "parameter-study grid over one axis");
  exp_cmd->add_option("--input", exp_in, "graph snapshot")->required();
  exp_cmd->add_option("--axis", exp_axis, "sampling|directivity|pooling|hidden_dim")
      ->required()
      ->check(CLI::IsMember({"sampling", "directivity", "pooling", "hidden_dim"}));
  exp_cmd->add_option("--report", exp_report, "JSON report path");
  add_train_options(exp_cmd, exp_opt);
  exp_cmd->callback([&]() {
    TransactionGraph g = load_snapshot_file(exp_in);
    TrainConfig cfg = exp_opt.resolve();
    GridReport grid = run_experiment_grid(g, cfg, exp_axis);
    if (!exp_report.empty()) write_text_file(exp_report, report_to_json(grid));
    std::cout << report_to_table(grid);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
