#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relcur/traintrack.hpp"
#include "relcur/whitehead.hpp"

namespace relcur {

// phi^p with the annotations rescaled accordingly.
TrainTrackSystem system_power(const TrainTrackSystem& tt, int p);

// Smallest power making some top-stratum direction begin its own image, and
// that direction; throws when the top stratum never expands.
std::pair<int, Letter> find_seed_direction(const TrainTrackSystem& tt);

// All reduced paths of edge length 1..max_len crossing the top stratum.
std::vector<Word> default_window(const TrainTrackSystem& tt, int max_len = 4);

struct StableCurrentResult {
  Letter seed = 0;
  int power_used = 1;
  double lambda = 0.0;
  std::map<Word, double> eta;  // eta+(v) = d_{v,seed} + d_{vbar,seed}
};

// The stable current of the map on the window, via the unit substitution.
StableCurrentResult stable_current(const TrainTrackSystem& tt, Letter seed_direction,
                                   const std::vector<Word>& window);
StableCurrentResult stable_current(const TrainTrackSystem& tt, const std::vector<Word>& window);

struct GoodnessReport {
  double l_r = 0.0;            // metric length of the loop
  double longest_legal = 0.0;  // L_r
  double g_r = 0.0;
  double b_r = 0.0;
  double goodness = 0.0;
  long long i_r = 0;
  bool exact = true;  // false when only the b_r <= 2 L_c i_r bound was usable
};

// Good/bad partition of a cyclic loop: bad is the union of the critical-length
// neighborhoods of the r-illegal turns.
GoodnessReport goodness(const TrainTrackSystem& tt, const TurnClassification& turns,
                        const Word& loop, double critical_len);
GoodnessReport goodness(const TrainTrackSystem& tt, const Word& loop);

struct IterStep {
  int n = 0;
  long long length = 0;                // edge length of the tightened loop
  GoodnessReport report;
  std::map<Word, double> coords;       // normalized window coordinates
  std::optional<CyclicWord> word;      // materialized loops only
};

// Tightened iterates of a loop with goodness and window coordinates; exact
// integer word growth, cap on the materialized length.
std::vector<IterStep> iterate_class(const TrainTrackSystem& tt, const CyclicWord& alpha, int n,
                                    const std::vector<Word>& window,
                                    std::size_t cap = 1'000'000);

// True iff the edge maps compose to the identity on every generator (rose
// representatives only).
bool verify_inverse(const TrainTrackSystem& tt_fwd, const TrainTrackSystem& tt_bwd);

struct NSStep {
  int n = 0;
  char direction = 'f';
  double distance = 0.0;
  double goodness = 0.0;
  double length = 0.0;
};

struct NSOptions {
  int n_max = 12;
  double eps = 1e-3;
  int window_len = 4;
  bool assume_separable = false;
  std::size_t cap = 1'000'000;
};

struct NSExperimentReport {
  std::vector<NSStep> steps;
  bool forward_converged = false;
  bool backward_converged = false;
  std::string verdict;
  std::vector<Word> window;
};

// Iterates the class under both directions, tracking normalized window
// distance to the respective stable current.  The backward system must verify
// as an inverse; the class must be A-separable (checked via the Whitehead
// module unless asserted).
NSExperimentReport ns_experiment(const TrainTrackSystem& tt_fwd, const TrainTrackSystem& tt_bwd,
                                 const FreeFactorSystem* ffs, const CyclicWord& alpha,
                                 const NSOptions& opts = {});

struct BackwardGrowthProbe {
  bool applicable = false;
  std::string note;
  std::vector<long long> i_r_trace;
};

// Diagnostic only: the forward structure's illegal-turn count measured along
// forward iterates of the inverse representative (the backward iterates of
// the map itself).
BackwardGrowthProbe backward_growth_probe(const TrainTrackSystem& tt_fwd,
                                          const TrainTrackSystem& tt_bwd, const CyclicWord& alpha,
                                          int n, double l0, std::size_t cap = 1'000'000);

}  // namespace relcur
