#include "boundlab/selectors.hpp"

#include <cmath>
#include <stdexcept>

#include "boundlab/fusion.hpp"

namespace boundlab {

namespace {

bool is_child_of_focus(const BnbNode& node, const PlungeState& plunge) {
  return plunge.focus_id >= 0 && node.parent_id == plunge.focus_id;
}

// BFS/BES plunge eligibility: stay within the depth budget and, once an
// incumbent exists, only dive while the child's estimate is promising.
bool plunge_eligible(const BnbNode& node, const PlungeState& plunge, const GlobalBounds& gb) {
  if (!is_child_of_focus(node, plunge)) return false;
  if (plunge.plunge_depth >= plunge.max_plunge_depth) return false;
  if (std::isfinite(gb.pb))
    return node.estimate <= gb.db + plunge.cutoff_factor * (gb.pb - gb.db);
  return true;
}

}  // namespace

SelectorPriority priority_dfs(const BnbNode& node, const PlungeState& plunge) {
  SelectorPriority p;
  p.plunge = is_child_of_focus(node, plunge) ? 1 : 0;
  p.key = static_cast<double>(node.depth);
  p.lb_tiebreak = node.lower_bound;
  p.id_tiebreak = node.id;
  return p;
}

SelectorPriority priority_bfs(const BnbNode& node, const PlungeState& plunge,
                              const GlobalBounds& gb) {
  SelectorPriority p;
  p.plunge = plunge_eligible(node, plunge, gb) ? 1 : 0;
  p.key = -node.lower_bound;
  p.lb_tiebreak = node.lower_bound;
  p.id_tiebreak = node.id;
  return p;
}

SelectorPriority priority_bes(const BnbNode& node, const PlungeState& plunge,
                              const GlobalBounds& gb) {
  SelectorPriority p;
  p.plunge = plunge_eligible(node, plunge, gb) ? 1 : 0;
  p.key = -node.estimate;
  p.lb_tiebreak = node.lower_bound;
  p.id_tiebreak = node.id;
  return p;
}

SelectorPriority priority_learned(const BnbNode& node, double pair_score) {
  SelectorPriority p;
  p.key = node.parent_id < 0 ? kInf : pair_score;  // root is alone in the queue
  p.lb_tiebreak = node.lower_bound;
  p.id_tiebreak = node.id;
  return p;
}

namespace {

class DfsSelector : public Selector {
 public:
  const char* name() const override { return "dfs"; }
  SelectorPriority priority(const BnbNode& node, const PlungeState& plunge,
                            const GlobalBounds&) const override {
    return priority_dfs(node, plunge);
  }
};

class BfsSelector : public Selector {
 public:
  const char* name() const override { return "bfs"; }
  SelectorPriority priority(const BnbNode& node, const PlungeState& plunge,
                            const GlobalBounds& gb) const override {
    return priority_bfs(node, plunge, gb);
  }
};

class BesSelector : public Selector {
 public:
  const char* name() const override { return "bes"; }
  SelectorPriority priority(const BnbNode& node, const PlungeState& plunge,
                            const GlobalBounds& gb) const override {
    return priority_bes(node, plunge, gb);
  }
};

class LearnedSelector : public Selector {
 public:
  explicit LearnedSelector(const FusionEnsemble* ensemble) : ensemble_(ensemble) {}
  const char* name() const override { return "learned"; }
  SelectorPriority priority(const BnbNode& node, const PlungeState&,
                            const GlobalBounds&) const override {
    return priority_learned(node, node.pair_score);
  }
  void score_pair(BnbNode& down, BnbNode& up) const override {
    auto [sd, su] = ensemble_->predict(*down.creation_features, *up.creation_features);
    down.pair_score = sd;
    up.pair_score = su;
  }
  bool wants_features() const override { return true; }

 private:
  const FusionEnsemble* ensemble_;
};

}  // namespace

std::unique_ptr<Selector> make_selector(const std::string& name, const FusionEnsemble* ensemble) {
  if (name == "dfs") return std::make_unique<DfsSelector>();
  if (name == "bfs") return std::make_unique<BfsSelector>();
  if (name == "bes") return std::make_unique<BesSelector>();
  if (name == "learned") {
    if (!ensemble) throw std::invalid_argument("learned selector requires a loaded model");
    return std::make_unique<LearnedSelector>(ensemble);
  }
  throw std::invalid_argument("unknown selector '" + name + "' (expected dfs|bfs|bes|learned)");
}

}  // namespace boundlab
