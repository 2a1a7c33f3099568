#pragma once

#include <memory>
#include <string>

#include "boundlab/bnb.hpp"

namespace boundlab {

class FusionEnsemble;

// Total order over queued nodes. plunge is a separate lexicographic tier so
// that a child-preference bonus cannot erode the resolution of the policy
// key. Larger compares first on (plunge, key); ties prefer the smaller lower
// bound, then the smaller id.
struct SelectorPriority {
  int plunge = 0;
  double key = 0.0;
  double lb_tiebreak = 0.0;
  int id_tiebreak = 0;

  bool better_than(const SelectorPriority& o) const {
    if (plunge != o.plunge) return plunge > o.plunge;
    if (key != o.key) return key > o.key;
    if (lb_tiebreak != o.lb_tiebreak) return lb_tiebreak < o.lb_tiebreak;
    return id_tiebreak < o.id_tiebreak;
  }
};

struct PlungeState {
  int focus_id = -1;      // node processed in the previous iteration
  int plunge_depth = 0;   // consecutive child selections so far
  int max_plunge_depth = 10;
  double cutoff_factor = 0.25;
};

struct GlobalBounds {
  double pb = kInf;
  double db = -kInf;
};

SelectorPriority priority_dfs(const BnbNode& node, const PlungeState& plunge);
SelectorPriority priority_bfs(const BnbNode& node, const PlungeState& plunge,
                              const GlobalBounds& gb);
SelectorPriority priority_bes(const BnbNode& node, const PlungeState& plunge,
                              const GlobalBounds& gb);
SelectorPriority priority_learned(const BnbNode& node, double pair_score);

// A node-selection policy. The engine pops the maximum-priority open node.
class Selector {
 public:
  virtual ~Selector() = default;
  virtual const char* name() const = 0;
  virtual SelectorPriority priority(const BnbNode& node, const PlungeState& plunge,
                                    const GlobalBounds& gb) const = 0;
  // Learned selectors score each new sibling pair at creation; others ignore it.
  virtual void score_pair(BnbNode& down, BnbNode& up) const {
    (void)down;
    (void)up;
  }
  virtual bool wants_features() const { return false; }
};

// name in {dfs, bfs, bes, learned}; learned requires a loaded ensemble.
std::unique_ptr<Selector> make_selector(const std::string& name,
                                        const FusionEnsemble* ensemble = nullptr);

}  // namespace boundlab
