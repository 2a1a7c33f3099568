#include "boundlab/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "boundlab/rng.hpp"
#include "boundlab/selectors.hpp"

namespace boundlab {

double primal_gap(std::optional<double> pb, double opt) {
  if (!pb.has_value() || !std::isfinite(*pb)) return 1.0;
  double diff = std::fabs(*pb - opt);
  if (diff <= 1e-9 * std::max(1.0, std::fabs(opt))) return 0.0;
  double denom = std::max(std::fabs(*pb), std::fabs(opt));
  if (denom == 0.0) return 0.0;
  return std::clamp(diff / denom, 0.0, 1.0);
}

namespace {

bool same_decision(const BranchDecision& a, const BranchDecision& b) {
  return a.var == b.var && a.dir == b.dir && a.bound == b.bound;
}

}  // namespace

long distance_to_opt(const BranchHistory& h_i, const BranchHistory& h_opt) {
  // diff: variables branched in conflicting directions in the two histories
  std::map<int, int> dirs_i;  // bit 0: down seen, bit 1: up seen
  for (const BranchDecision& d : h_i) dirs_i[d.var] |= d.dir == BranchDir::down ? 1 : 2;
  std::map<int, int> dirs_o;
  for (const BranchDecision& d : h_opt) dirs_o[d.var] |= d.dir == BranchDir::down ? 1 : 2;
  long diff = 0;
  for (const auto& [var, mi] : dirs_i) {
    auto it = dirs_o.find(var);
    if (it == dirs_o.end()) continue;
    int mo = it->second;
    if (((mi & 1) && (mo & 2)) || ((mi & 2) && (mo & 1))) ++diff;
  }
  // LCS: longest contiguous run of identical decisions
  size_t n = h_i.size(), m = h_opt.size();
  long lcs = 0;
  std::vector<long> prev(m + 1, 0), cur(m + 1, 0);
  for (size_t a = 1; a <= n; ++a) {
    for (size_t b = 1; b <= m; ++b) {
      cur[b] = same_decision(h_i[a - 1], h_opt[b - 1]) ? prev[b - 1] + 1 : 0;
      lcs = std::max(lcs, cur[b]);
    }
    std::swap(prev, cur);
  }
  return static_cast<long>(h_opt.size()) + diff - lcs;
}

namespace {

struct CellOutcome {
  MetricRow row;
  std::vector<std::pair<long, double>> pb_samples;  // (nodes_processed, pb)
  DistanceTrace trace;
};

CellOutcome run_cell(const MilpInstance& inst, const std::string& selector_name,
                     const SolveLimits& limits, const FusionEnsemble* model) {
  CellOutcome cell;
  cell.row.instance_id = inst.name;
  cell.row.selector = selector_name;
  cell.trace.instance_id = inst.name;
  cell.trace.selector = selector_name;
  try {
    auto selector = make_selector(selector_name, model);
    RunRecord run = solve(inst, *selector, limits, inst.seed);
    const SolveResult& r = run.result;
    cell.row.status = r.status;
    cell.row.nodes = r.nodes_processed;
    cell.row.bpb_nodes = r.bpb_nodes;
    cell.row.bpb_time = r.bpb_time;
    cell.row.solve_time = r.solve_time;
    cell.row.optimum = r.incumbent_objective;  // best known for this cell, merged later

    long solved = 0;
    cell.pb_samples.emplace_back(0, kInf);
    for (const Event& e : r.event_log) {
      if (e.kind == EventKind::node_solved) ++solved;
      if (e.kind == EventKind::incumbent) cell.pb_samples.emplace_back(solved, e.value);
    }
    cell.pb_samples.emplace_back(r.nodes_processed, r.incumbent_objective);

    if (r.bpb_node >= 0) {
      BranchHistory h_opt = node_history(run.tree, r.bpb_node);
      long sel_idx = 0;
      for (const Event& e : r.event_log) {
        if (e.kind != EventKind::selected) continue;
        cell.trace.samples.emplace_back(sel_idx,
                                        distance_to_opt(node_history(run.tree, e.node_id), h_opt));
        ++sel_idx;
        if (e.node_id == r.bpb_node) break;  // trace ends at the bpb selection
      }
    }
  } catch (const std::exception&) {
    cell.row.status = SolveStatus::error;
  }
  return cell;
}

}  // namespace

BenchOutput run_benchmark(const std::vector<MilpInstance>& instances,
                          const std::vector<std::string>& selectors, const SolveLimits& limits,
                          const FusionEnsemble* model, int jobs) {
  int ni = static_cast<int>(instances.size());
  int ns = static_cast<int>(selectors.size());
  std::vector<CellOutcome> cells(static_cast<size_t>(ni) * ns);

#ifdef _OPENMP
  int threads = jobs > 0 ? jobs : omp_get_max_threads();
#else
  int threads = 1;
  (void)jobs;
#endif
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int c = 0; c < ni * ns; ++c)
    cells[c] = run_cell(instances[c / ns], selectors[c % ns], limits, model);

  // best known optimum per instance across selectors
  std::vector<double> best(ni, kInf);
  for (int i = 0; i < ni; ++i)
    for (int s = 0; s < ns; ++s)
      best[i] = std::min(best[i], cells[static_cast<size_t>(i) * ns + s].row.optimum);

  BenchOutput out;
  for (int i = 0; i < ni; ++i)
    for (int s = 0; s < ns; ++s) {
      CellOutcome& cell = cells[static_cast<size_t>(i) * ns + s];
      cell.row.optimum = best[i];
      out.rows.push_back(cell.row);
      GapCurve curve;
      curve.instance_id = cell.row.instance_id;
      curve.selector = cell.row.selector;
      for (const auto& [nodes, pb] : cell.pb_samples) {
        double g = primal_gap(std::isfinite(pb) ? std::optional<double>(pb) : std::nullopt,
                              best[i]);
        if (!curve.samples.empty() && curve.samples.back().first == nodes)
          curve.samples.back().second = std::min(curve.samples.back().second, g);
        else
          curve.samples.emplace_back(nodes, g);
      }
      out.curves.push_back(std::move(curve));
      out.traces.push_back(std::move(cell.trace));
    }
  return out;
}

WinTable count_wins(const std::vector<MetricRow>& rows) {
  WinTable t;
  std::vector<std::string> selectors, instances;
  for (const MetricRow& r : rows) {
    if (std::find(selectors.begin(), selectors.end(), r.selector) == selectors.end())
      selectors.push_back(r.selector);
    if (std::find(instances.begin(), instances.end(), r.instance_id) == instances.end())
      instances.push_back(r.instance_id);
  }
  std::map<std::string, int> wins;
  for (const std::string& s : selectors) wins[s] = 0;
  t.num_instances = static_cast<int>(instances.size());
  for (const std::string& inst : instances) {
    double best = kInf;
    for (const MetricRow& r : rows)
      if (r.instance_id == inst && r.status == SolveStatus::optimal)
        best = std::min(best, r.solve_time);
    if (!std::isfinite(best)) {
      ++t.excluded;
      continue;
    }
    int tied = 0;
    for (const MetricRow& r : rows)
      if (r.instance_id == inst && r.status == SolveStatus::optimal && r.solve_time == best) {
        ++wins[r.selector];
        ++tied;
      }
    t.ties_extra += tied - 1;
  }
  for (const std::string& s : selectors) t.wins.emplace_back(s, wins[s]);
  return t;
}

std::vector<ImportanceRow> permutation_importance(const FusionEnsemble& ensemble,
                                                  const std::vector<PairSample>& heldout,
                                                  int repeats, uint64_t seed) {
  std::vector<ImportanceRow> out;
  if (repeats <= 0) {
    fprintf(stderr, "warning: permutation_importance called with repeats=%d, nothing to do\n",
            repeats);
    return out;
  }
  if (heldout.empty()) throw std::invalid_argument("permutation_importance: empty held-out set");

  double base = pairwise_accuracy(ensemble, heldout);
  int n = static_cast<int>(heldout.size());
  out.resize(kFeatureDim);
  for (int k = 0; k < kFeatureDim; ++k) {
    out[k].feature = k;
    out[k].name = kFeatureNames[k];
  }
  std::vector<PairSample> scratch;
  for (int rep = 0; rep < repeats; ++rep) {
    Rng rng(Rng::mix(seed, 0x9e20000ULL + rep));
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    for (int k = 0; k < kFeatureDim; ++k) {
      scratch = heldout;
      for (int i = 0; i < n; ++i) scratch[i].a[k] = heldout[perm[i]].a[k];
      out[k].self_importance += base - pairwise_accuracy(ensemble, scratch);
      scratch = heldout;
      for (int i = 0; i < n; ++i) scratch[i].b[k] = heldout[perm[i]].b[k];
      out[k].sibling_importance += base - pairwise_accuracy(ensemble, scratch);
    }
  }
  for (ImportanceRow& r : out) {
    r.self_importance /= repeats;
    r.sibling_importance /= repeats;
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV + SVG emission

namespace {

std::string fmt(double v) {
  char buf[64];
  if (!std::isfinite(v)) return v > 0 ? "inf" : "-inf";
  snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void open_out(std::ofstream& os, const std::filesystem::path& p) {
  os.open(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + p.string());
}

struct Series {
  std::string label;
  std::vector<double> x, y, lo, hi;  // band optional (lo/hi empty -> none)
};

// Minimal static SVG line plot with optional confidence bands.
void write_svg_lines(const std::filesystem::path& path, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series) {
  const double W = 720, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf;
  for (const Series& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      double lo = s.lo.empty() ? s.y[i] : s.lo[i];
      double hi = s.hi.empty() ? s.y[i] : s.hi[i];
      ymin = std::min(ymin, lo);
      ymax = std::max(ymax, hi);
    }
  if (!std::isfinite(xmin)) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b"};
  std::ostringstream s;
  char buf[128];
  auto coord = [&](double v) {
    snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
    << "</text>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
    << xlabel << "</text>\n";
  s << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
    << H / 2 << ")\">" << ylabel << "</text>\n";
  // axes with min/max tick labels
  s << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
    << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << ml << "\" y=\"" << H - mb + 16 << "\" font-size=\"10\">" << fmt(xmin)
    << "</text>\n";
  s << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 16
    << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(xmax) << "</text>\n";
  s << "<text x=\"" << ml - 6 << "\" y=\"" << H - mb << "\" text-anchor=\"end\" font-size=\"10\">"
    << fmt(ymin) << "</text>\n";
  s << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 4 << "\" text-anchor=\"end\" font-size=\"10\">"
    << fmt(ymax) << "</text>\n";
  for (size_t si = 0; si < series.size(); ++si) {
    const Series& sr = series[si];
    const char* col = colors[si % 6];
    if (!sr.lo.empty()) {
      s << "<polygon fill=\"" << col << "\" opacity=\"0.15\" points=\"";
      for (size_t i = 0; i < sr.x.size(); ++i)
        s << coord(px(sr.x[i])) << "," << coord(py(sr.hi[i])) << " ";
      for (size_t i = sr.x.size(); i-- > 0;)
        s << coord(px(sr.x[i])) << "," << coord(py(sr.lo[i])) << " ";
      s << "\"/>\n";
    }
    s << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < sr.x.size(); ++i)
      s << coord(px(sr.x[i])) << "," << coord(py(sr.y[i])) << " ";
    s << "\"/>\n";
    s << "<text x=\"" << W - mr - 4 << "\" y=\"" << mt + 16 + 16 * si
      << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << col << "\">" << sr.label
      << "</text>\n";
  }
  s << "</svg>\n";
  std::ofstream os;
  open_out(os, path);
  os << s.str();
}

void write_svg_scatter(const std::filesystem::path& path, const std::string& title,
                       const std::vector<std::string>& labels,
                       const std::vector<std::vector<std::pair<double, double>>>& groups) {
  std::vector<Series> dummy;
  const double W = 720, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = 0, xmax = 1e-9, ymin = 0, ymax = 1e-9;
  for (const auto& g : groups)
    for (const auto& [x, y] : g) {
      xmax = std::max(xmax, x);
      ymax = std::max(ymax, y);
    }
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b"};
  std::ostringstream s;
  char buf[128];
  auto coord = [&](double v) {
    snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
    << "</text>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
    << "\" text-anchor=\"middle\" font-size=\"12\">bpb_time (s)</text>\n";
  s << "<text x=\"16\" y=\"" << H / 2
    << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << H / 2
    << ")\">solve_time (s)</text>\n";
  s << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
    << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 16
    << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(xmax) << "</text>\n";
  s << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 4 << "\" text-anchor=\"end\" font-size=\"10\">"
    << fmt(ymax) << "</text>\n";
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    const char* col = colors[gi % 6];
    for (const auto& [x, y] : groups[gi])
      s << "<circle cx=\"" << coord(px(x)) << "\" cy=\"" << coord(py(y))
        << "\" r=\"3\" fill=\"" << col << "\" opacity=\"0.6\"/>\n";
    s << "<text x=\"" << W - mr - 4 << "\" y=\"" << mt + 16 + 16 * gi
      << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << col << "\">" << labels[gi]
      << "</text>\n";
  }
  s << "</svg>\n";
  std::ofstream os;
  open_out(os, path);
  os << s.str();
  (void)dummy;
}

std::vector<std::string> selector_order(const std::vector<MetricRow>& rows) {
  std::vector<std::string> out;
  for (const MetricRow& r : rows)
    if (std::find(out.begin(), out.end(), r.selector) == out.end()) out.push_back(r.selector);
  return out;
}

// step-function value of a gap curve at a node count
double curve_at(const GapCurve& c, double nodes) {
  double v = 1.0;
  for (const auto& [n, g] : c.samples) {
    if (static_cast<double>(n) <= nodes)
      v = g;
    else
      break;
  }
  return v;
}

}  // namespace

std::string metric_row_csv_header() {
  return "instance,selector,status,nodes,bpb_nodes,bpb_time,solve_time,optimum";
}

std::string metric_row_csv(const MetricRow& r) {
  std::ostringstream s;
  s << r.instance_id << "," << r.selector << "," << solve_status_name(r.status) << "," << r.nodes
    << "," << r.bpb_nodes << "," << fmt(r.bpb_time) << "," << fmt(r.solve_time) << ","
    << fmt(r.optimum);
  return s.str();
}

void emit_report(const BenchOutput& bench, const std::vector<ImportanceRow>& importance,
                 const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  {
    std::ofstream os;
    open_out(os, out_dir / "metrics.csv");
    os << "# one row per (instance, selector) solve\n";
    os << "# times are deterministic work-proxy seconds unless produced with --wall-clock\n";
    os << "# optimum is the best known objective across selectors, canonical minimization\n";
    os << metric_row_csv_header() << "\n";
    for (const MetricRow& r : bench.rows) os << metric_row_csv(r) << "\n";
  }
  {
    std::ofstream os;
    open_out(os, out_dir / "gap_curves.csv");
    os << "# primal gap = |pb - opt| / max(|pb|, |opt|), clipped to [0,1]; 1 without incumbent\n";
    os << "instance,selector,nodes,gap\n";
    for (const GapCurve& c : bench.curves)
      for (const auto& [n, g] : c.samples)
        os << c.instance_id << "," << c.selector << "," << n << "," << fmt(g) << "\n";
  }
  {
    std::ofstream os;
    open_out(os, out_dir / "distance_traces.csv");
    os << "# D = len(h_opt) + diff - LCS per selection, up to the bpb selection\n";
    os << "instance,selector,selection,distance\n";
    for (const DistanceTrace& t : bench.traces)
      for (const auto& [s, d] : t.samples)
        os << t.instance_id << "," << t.selector << "," << s << "," << d << "\n";
  }
  {
    WinTable w = count_wins(bench.rows);
    std::ofstream os;
    open_out(os, out_dir / "wins.csv");
    os << "# win: fastest solve_time among solved rows of an instance; ties award every tied "
          "selector\n";
    os << "# identity: sum(wins) - ties_extra = num_instances - excluded\n";
    os << "selector,wins\n";
    for (const auto& [sel, n] : w.wins) os << sel << "," << n << "\n";
    os << "# ties_extra," << w.ties_extra << "\n";
    os << "# excluded," << w.excluded << "\n";
    os << "# num_instances," << w.num_instances << "\n";
  }
  {
    std::ofstream os;
    open_out(os, out_dir / "importance.csv");
    os << "# permutation importance: accuracy drop when the feature column is shuffled\n";
    os << "feature,name,self_importance,sibling_importance\n";
    for (const ImportanceRow& r : importance)
      os << r.feature << "," << r.name << "," << fmt(r.self_importance) << ","
         << fmt(r.sibling_importance) << "\n";
  }

  if (bench.rows.empty()) {
    fprintf(stderr, "warning: empty benchmark, header-only CSVs written, no plots\n");
    return;
  }

  std::vector<std::string> sels = selector_order(bench.rows);

  // mean gap vs nodes with 95% bands
  {
    long max_nodes = 1;
    for (const GapCurve& c : bench.curves)
      if (!c.samples.empty()) max_nodes = std::max(max_nodes, c.samples.back().first);
    const int kGrid = 64;
    std::vector<Series> series;
    for (const std::string& sel : sels) {
      Series sr;
      sr.label = sel;
      for (int g = 0; g <= kGrid; ++g) {
        double nodes = max_nodes * static_cast<double>(g) / kGrid;
        double sum = 0.0, sum2 = 0.0;
        int n = 0;
        for (const GapCurve& c : bench.curves) {
          if (c.selector != sel) continue;
          double v = curve_at(c, nodes);
          sum += v;
          sum2 += v * v;
          ++n;
        }
        if (n == 0) continue;
        double mean = sum / n;
        double var = n > 1 ? std::max(0.0, (sum2 - n * mean * mean) / (n - 1)) : 0.0;
        double half = n > 1 ? 1.96 * std::sqrt(var / n) : 0.0;
        sr.x.push_back(nodes);
        sr.y.push_back(mean);
        sr.lo.push_back(std::max(0.0, mean - half));
        sr.hi.push_back(std::min(1.0, mean + half));
      }
      series.push_back(std::move(sr));
    }
    write_svg_lines(out_dir / "gap_mean.svg", "mean primal gap vs processed nodes",
                    "nodes processed", "primal gap", series);
  }

  // mean distance vs selection index
  {
    size_t max_len = 0;
    for (const DistanceTrace& t : bench.traces) max_len = std::max(max_len, t.samples.size());
    std::vector<Series> series;
    for (const std::string& sel : sels) {
      Series sr;
      sr.label = sel;
      for (size_t s = 0; s < max_len; ++s) {
        double sum = 0.0, sum2 = 0.0;
        int n = 0;
        for (const DistanceTrace& t : bench.traces) {
          if (t.selector != sel || s >= t.samples.size()) continue;
          double v = static_cast<double>(t.samples[s].second);
          sum += v;
          sum2 += v * v;
          ++n;
        }
        if (n == 0) continue;
        double mean = sum / n;
        double var = n > 1 ? std::max(0.0, (sum2 - n * mean * mean) / (n - 1)) : 0.0;
        double half = n > 1 ? 1.96 * std::sqrt(var / n) : 0.0;
        sr.x.push_back(static_cast<double>(s));
        sr.y.push_back(mean);
        sr.lo.push_back(std::max(0.0, mean - half));
        sr.hi.push_back(mean + half);
      }
      series.push_back(std::move(sr));
    }
    write_svg_lines(out_dir / "distance_mean.svg",
                    "mean distance to the optimal-path node vs selection", "selection index",
                    "distance", series);
  }

  // bpb/solve time scatter
  {
    std::vector<std::vector<std::pair<double, double>>> groups(sels.size());
    for (const MetricRow& r : bench.rows) {
      size_t gi = std::find(sels.begin(), sels.end(), r.selector) - sels.begin();
      groups[gi].emplace_back(r.bpb_time, r.solve_time);
    }
    write_svg_scatter(out_dir / "time_scatter.svg", "bpb-time vs solving time", sels, groups);
  }
}

BenchOutput read_report_csvs(const std::filesystem::path& dir) {
  BenchOutput out;
  auto split = [](const std::string& line) {
    std::vector<std::string> f;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        f.push_back(cur);
        cur.clear();
      } else
        cur.push_back(ch);
    }
    f.push_back(cur);
    return f;
  };
  auto status_from = [](const std::string& s) {
    if (s == "optimal") return SolveStatus::optimal;
    if (s == "node-limit") return SolveStatus::node_limit;
    if (s == "time-limit") return SolveStatus::time_limit;
    return SolveStatus::error;
  };
  auto for_each_row = [&](const std::filesystem::path& p, auto&& fn) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open: " + p.string());
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (!header_seen) {
        header_seen = true;  // column header row
        continue;
      }
      fn(split(line));
    }
  };
  for_each_row(dir / "metrics.csv", [&](const std::vector<std::string>& f) {
    if (f.size() != 8) throw parse_error("metrics.csv: bad column count");
    MetricRow r;
    r.instance_id = f[0];
    r.selector = f[1];
    r.status = status_from(f[2]);
    r.nodes = std::stol(f[3]);
    r.bpb_nodes = std::stol(f[4]);
    r.bpb_time = std::stod(f[5]);
    r.solve_time = std::stod(f[6]);
    r.optimum = f[7] == "inf" ? kInf : std::stod(f[7]);
    out.rows.push_back(std::move(r));
  });
  for_each_row(dir / "gap_curves.csv", [&](const std::vector<std::string>& f) {
    if (f.size() != 4) throw parse_error("gap_curves.csv: bad column count");
    if (out.curves.empty() || out.curves.back().instance_id != f[0] ||
        out.curves.back().selector != f[1]) {
      GapCurve c;
      c.instance_id = f[0];
      c.selector = f[1];
      out.curves.push_back(std::move(c));
    }
    out.curves.back().samples.emplace_back(std::stol(f[2]), std::stod(f[3]));
  });
  for_each_row(dir / "distance_traces.csv", [&](const std::vector<std::string>& f) {
    if (f.size() != 4) throw parse_error("distance_traces.csv: bad column count");
    if (out.traces.empty() || out.traces.back().instance_id != f[0] ||
        out.traces.back().selector != f[1]) {
      DistanceTrace t;
      t.instance_id = f[0];
      t.selector = f[1];
      out.traces.push_back(std::move(t));
    }
    out.traces.back().samples.emplace_back(std::stol(f[2]), std::stol(f[3]));
  });
  return out;
}

}  // namespace boundlab
