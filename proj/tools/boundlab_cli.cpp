// boundlab: generate MILP benchmark instances, solve them with branch and
// bound under different node-selection policies, harvest oracle-path training
// pairs, train the fusion-network scorer ensemble, and benchmark selectors.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "boundlab/datagen.hpp"
#include "boundlab/evalkit.hpp"
#include "boundlab/fusion.hpp"
#include "boundlab/milp.hpp"
#include "boundlab/selectors.hpp"

namespace fs = std::filesystem;
using namespace boundlab;

namespace {

uint64_t env_seed_default() {
  const char* s = std::getenv("BOUNDLAB_SEED");
  if (!s) return 0;
  return std::strtoull(s, nullptr, 10);
}

std::vector<fs::path> list_instances(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) throw std::invalid_argument("not a directory: " + dir.string());
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::invalid_argument("no .json instances in " + dir.string());
  return files;
}

std::vector<MilpInstance> load_instances(const fs::path& dir) {
  std::vector<MilpInstance> out;
  for (const fs::path& p : list_instances(dir)) out.push_back(read_instance(p));
  return out;
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : csv) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else
      cur.push_back(c);
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct FamilyParams {
  int rows = 0, cols = 0;
  double density = 0.05;
  int cost_range = 100;
  int items = 0, bids = 0;
  int customers = 0, facilities = 0;
  double ratio = 2.0;
};

void apply_preset(const std::string& preset, const std::string& family, FamilyParams& p) {
  if (preset.empty()) return;
  if (preset == "tiny") {
    p.rows = 8; p.cols = 16; p.density = 0.2; p.cost_range = 100;
    p.items = 10; p.bids = 15;
    p.customers = 8; p.facilities = 5; p.ratio = 1.5;
  } else if (preset == "easy") {
    p.rows = 60; p.cols = 120; p.density = 0.05; p.cost_range = 1;
    p.items = 30; p.bids = 60;
    p.customers = 15; p.facilities = 8; p.ratio = 2.0;
  } else if (preset == "medium") {
    p.rows = 90; p.cols = 180; p.density = 0.04; p.cost_range = 1;
    p.items = 50; p.bids = 120;
    p.customers = 25; p.facilities = 12; p.ratio = 2.0;
  } else {
    throw std::invalid_argument("unknown preset '" + preset + "' (tiny|easy|medium)");
  }
  (void)family;
}

MilpInstance generate_one(const std::string& family, const FamilyParams& p, uint64_t seed) {
  if (family == "setcover")
    return generate_set_covering(p.rows, p.cols, p.density, seed, p.cost_range);
  if (family == "auction") return generate_combinatorial_auction(p.items, p.bids, seed);
  if (family == "cfl")
    return generate_cap_facility_location(p.customers, p.facilities, p.ratio, seed);
  throw std::invalid_argument("unknown family '" + family + "' (setcover|auction|cfl)");
}

int run_app(int argc, char** argv) {
  CLI::App app{"branch-and-bound MILP laboratory with learned node selection"};
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate benchmark instances");
  std::string g_family, g_preset, g_out;
  FamilyParams g_params;
  int g_count = 1;
  uint64_t g_seed = env_seed_default();
  gen->add_option("--family", g_family, "instance family: setcover|auction|cfl")->required();
  gen->add_option("--preset", g_preset, "size preset: tiny|easy|medium");
  gen->add_option("--rows", g_params.rows, "set covering: constraint rows");
  gen->add_option("--cols", g_params.cols, "set covering: columns (variables)");
  gen->add_option("--density", g_params.density, "set covering: coefficient density");
  gen->add_option("--cost-range", g_params.cost_range,
                  "set covering: costs drawn from [1,cost_range]");
  gen->add_option("--items", g_params.items, "auction: number of items");
  gen->add_option("--bids", g_params.bids, "auction: number of bids");
  gen->add_option("--customers", g_params.customers, "cfl: number of customers");
  gen->add_option("--facilities", g_params.facilities, "cfl: number of facilities");
  gen->add_option("--ratio", g_params.ratio, "cfl: total capacity / total demand");
  gen->add_option("-n,--count", g_count, "number of instances");
  gen->add_option("--seed", g_seed, "base seed (instance i uses seed+i)");
  gen->add_option("--out", g_out, "output directory")->required();

  // ---- solve ----
  auto* solve_cmd = app.add_subcommand("solve", "solve one instance with one selector");
  std::string s_instance, s_selector = "bes", s_model, s_events;
  SolveLimits s_limits;
  uint64_t s_seed = env_seed_default();
  solve_cmd->add_option("--instance", s_instance, "instance file")->required();
  solve_cmd->add_option("--selector", s_selector, "node selector: dfs|bfs|bes|learned");
  solve_cmd->add_option("--model", s_model, "fusion model file (required for learned)");
  solve_cmd->add_option("--time-limit", s_limits.time_limit, "time limit in seconds");
  solve_cmd->add_option("--node-limit", s_limits.node_limit, "processed-node limit");
  solve_cmd->add_flag("--wall-clock", s_limits.wall_clock,
                      "measure wall-clock time instead of the deterministic work clock");
  solve_cmd->add_option("--events", s_events, "write the event log (JSONL) to this file");
  solve_cmd->add_option("--seed", s_seed, "solver seed");

  // ---- collect ----
  auto* collect = app.add_subcommand("collect", "build a training dataset from instances");
  std::string c_dir, c_out, c_selector = "bes", c_family = "custom", c_scale = "custom";
  int c_pair_cap = 32;
  uint64_t c_seed = env_seed_default();
  SolveLimits c_limits;
  bool c_resolve_check = false;
  collect->add_option("--instances", c_dir, "directory of instance .json files")->required();
  collect->add_option("--out", c_out, "output dataset file")->required();
  collect->add_option("--pair-cap", c_pair_cap, "partner cap per queue state");
  collect->add_option("--seed", c_seed, "sampling seed");
  collect->add_option("--selector", c_selector, "selector for the labeling solves");
  collect->add_option("--family", c_family, "family label stored in the dataset header");
  collect->add_option("--scale", c_scale, "scale label stored in the dataset header");
  collect->add_option("--time-limit", c_limits.time_limit, "per-instance time limit (seconds)");
  collect->add_option("--node-limit", c_limits.node_limit, "per-instance node limit");
  collect->add_flag("--resolve-check", c_resolve_check,
                    "re-solve each instance and assert tree equality (determinism check)");

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "train the fusion ensemble on a dataset");
  std::string t_dataset, t_out, t_curves;
  FusionConfig t_cfg;
  train_cmd->add_option("--dataset", t_dataset, "training dataset file")->required();
  train_cmd->add_option("--out", t_out, "output model file")->required();
  train_cmd->add_option("--curves", t_curves, "training-curve CSV (default <out>.curves.csv)");
  train_cmd->add_option("--hidden", t_cfg.hidden_dim, "hidden width of the mix MLPs");
  train_cmd->add_option("--blocks", t_cfg.num_blocks, "number of fusion blocks");
  train_cmd->add_option("--dropout", t_cfg.dropout, "dropout rate");
  train_cmd->add_option("--members", t_cfg.ensemble_size, "ensemble size M");
  train_cmd->add_option("--kfold", t_cfg.kfold, "K-fold selection rounds");
  train_cmd->add_option("--lr", t_cfg.learning_rate, "learning rate");
  train_cmd->add_option("--momentum", t_cfg.momentum, "momentum");
  train_cmd->add_option("--batch", t_cfg.batch_size, "mini-batch size (pairs)");
  train_cmd->add_option("--epochs", t_cfg.epochs, "training epochs per member");
  train_cmd->add_option("--seed", t_cfg.seed, "training seed");

  // ---- bench ----
  auto* bench = app.add_subcommand("bench", "run the selector benchmark matrix");
  std::string b_dir, b_selectors, b_model, b_out, b_imp_dataset;
  SolveLimits b_limits;
  int b_jobs = 0, b_imp_repeats = 10, b_imp_max = 2000;
  bench->add_option("--instances", b_dir, "directory of instance .json files")->required();
  bench->add_option("--selectors", b_selectors,
                    "comma list of selectors (default dfs,bfs,bes plus learned when --model)");
  bench->add_option("--model", b_model, "fusion model file for the learned selector");
  bench->add_option("--out", b_out, "report output directory")->required();
  bench->add_option("--time-limit", b_limits.time_limit, "per-solve time limit (seconds)");
  bench->add_option("--node-limit", b_limits.node_limit, "per-solve node limit");
  bench->add_flag("--wall-clock", b_limits.wall_clock,
                  "measure wall-clock time instead of the deterministic work clock");
  bench->add_option("--jobs", b_jobs, "parallel (instance, selector) cells");
  bench->add_option("--importance-dataset", b_imp_dataset,
                    "held-out dataset for permutation importance (requires --model)");
  bench->add_option("--importance-repeats", b_imp_repeats, "permutation repeats");
  bench->add_option("--importance-max-pairs", b_imp_max,
                    "cap on held-out pairs used for importance");

  // ---- report ----
  auto* report = app.add_subcommand("report", "re-emit a report from saved CSVs");
  std::string r_in, r_out;
  report->add_option("--in", r_in, "directory with metrics/gap/distance CSVs")->required();
  report->add_option("--out", r_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    apply_preset(g_preset, g_family, g_params);
    fs::create_directories(g_out);
    for (int i = 0; i < g_count; ++i) {
      MilpInstance inst = generate_one(g_family, g_params, g_seed + static_cast<uint64_t>(i));
      write_instance(inst, fs::path(g_out) / (inst.name + ".json"));
    }
    std::printf("wrote %d %s instance(s) to %s\n", g_count, g_family.c_str(), g_out.c_str());
    return 0;
  }

  if (solve_cmd->parsed()) {
    MilpInstance inst = read_instance(s_instance);
    std::optional<FusionEnsemble> model;
    if (!s_model.empty()) model = load_model(s_model);
    if (s_selector == "learned" && !model)
      throw std::invalid_argument("selector 'learned' needs --model <file>");
    auto selector = make_selector(s_selector, model ? &*model : nullptr);
    RunRecord run = solve(inst, *selector, s_limits, s_seed);
    MetricRow row;
    row.instance_id = inst.name;
    row.selector = s_selector;
    row.status = run.result.status;
    row.nodes = run.result.nodes_processed;
    row.bpb_nodes = run.result.bpb_nodes;
    row.bpb_time = run.result.bpb_time;
    row.solve_time = run.result.solve_time;
    row.optimum = run.result.incumbent_objective;
    std::printf("%s\n%s\n", metric_row_csv_header().c_str(), metric_row_csv(row).c_str());
    if (!s_events.empty()) {
      std::ofstream os(s_events, std::ios::binary);
      if (!os) throw std::runtime_error("cannot open for writing: " + s_events);
      os << event_log_to_jsonl(run.result.event_log);
    }
    return 0;
  }

  if (collect->parsed()) {
    std::vector<MilpInstance> instances = load_instances(c_dir);
    if (c_resolve_check) {
      for (const MilpInstance& inst : instances) {
        LabelingOutcome outcome = label_oracle_nodes(inst, c_limits, c_selector);
        if (outcome.skipped) continue;
        std::string msg;
        if (!resolve_check(inst, outcome, c_limits, c_selector, &msg))
          throw std::runtime_error("resolve check failed: " + msg);
      }
      std::printf("resolve check passed on %zu instance(s)\n", instances.size());
    }
    DatasetHeader header;
    header.family = c_family;
    header.scale = c_scale;
    header.pair_cap = c_pair_cap;
    header.seed = c_seed;
    DatasetSummary sum =
        build_dataset(instances, c_limits, c_pair_cap, c_seed, header, c_out, c_selector);
    std::printf("dataset %s: %ld pairs from %d instance(s), %d skipped, oracle fraction %.4f\n",
                c_out.c_str(), sum.num_pairs, sum.num_instances, sum.num_instances_skipped,
                sum.oracle_fraction);
    return 0;
  }

  if (train_cmd->parsed()) {
    Dataset ds = read_dataset(t_dataset);
    EnsembleTrainReport rep;
    FusionEnsemble ens = train_ensemble(ds.pairs, t_cfg, &rep);
    save_model(ens, t_out);
    std::string curves_path = t_curves.empty() ? t_out + ".curves.csv" : t_curves;
    std::ofstream os(curves_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + curves_path);
    os << "# per-member training curves of the winning fold\n";
    os << "member,epoch,train_loss,val_loss\n";
    char buf[128];
    for (size_t m = 0; m < rep.member_curves.size(); ++m)
      for (const TrainCurvePoint& pt : rep.member_curves[m]) {
        snprintf(buf, sizeof buf, "%zu,%d,%.12g,%.12g\n", m, pt.epoch, pt.train_loss,
                 pt.val_loss);
        os << buf;
      }
    std::printf("model %s: winning fold %d, fold validation accuracy %.4f\n", t_out.c_str(),
                rep.winning_fold, rep.val_accuracy);
    return 0;
  }

  if (bench->parsed()) {
    std::vector<MilpInstance> instances = load_instances(b_dir);
    std::optional<FusionEnsemble> model;
    if (!b_model.empty()) model = load_model(b_model);
    std::vector<std::string> selectors =
        b_selectors.empty()
            ? (model ? std::vector<std::string>{"dfs", "bfs", "bes", "learned"}
                     : std::vector<std::string>{"dfs", "bfs", "bes"})
            : split_list(b_selectors);
    for (const std::string& s : selectors)
      if (s == "learned" && !model)
        throw std::invalid_argument("selector 'learned' needs --model <file>");
    BenchOutput out = run_benchmark(instances, selectors, b_limits, model ? &*model : nullptr,
                                    b_jobs);
    std::vector<ImportanceRow> importance;
    if (!b_imp_dataset.empty()) {
      if (!model) throw std::invalid_argument("--importance-dataset needs --model");
      Dataset heldout = read_dataset(b_imp_dataset);
      if (static_cast<int>(heldout.pairs.size()) > b_imp_max)
        heldout.pairs.resize(b_imp_max);
      importance = permutation_importance(*model, heldout.pairs, b_imp_repeats,
                                          heldout.header.seed);
    }
    emit_report(out, importance, b_out);
    WinTable w = count_wins(out.rows);
    for (const auto& [sel, n] : w.wins)
      std::printf("%-8s wins %d / %d\n", sel.c_str(), n, w.num_instances);
    std::printf("report written to %s\n", b_out.c_str());
    return 0;
  }

  if (report->parsed()) {
    BenchOutput bench_data = read_report_csvs(r_in);
    std::vector<ImportanceRow> importance;  // re-emitted reports recompute plots only
    emit_report(bench_data, importance, r_out);
    std::printf("report re-emitted to %s\n", r_out.c_str());
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_app(argc, argv);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const parse_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const schema_version_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 2;
  }
}
