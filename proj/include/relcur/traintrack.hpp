#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relcur/substitution.hpp"
#include "relcur/words.hpp"

namespace relcur {

// Oriented edges are Letters over the edge alphabet: +(i+1) the i-th edge,
// -(i+1) its reverse.
struct MarkedGraph {
  struct Edge {
    std::string name;
    int from = 0, to = 0;
  };
  int n_vertices = 1;
  std::vector<Edge> edges;

  static MarkedGraph rose(const std::vector<std::string>& names);

  int num_edges() const { return static_cast<int>(edges.size()); }
  int dir_from(Letter d) const {
    const Edge& e = edges[letter_index(d)];
    return d > 0 ? e.from : e.to;
  }
  int dir_to(Letter d) const {
    const Edge& e = edges[letter_index(d)];
    return d > 0 ? e.to : e.from;
  }
  Alphabet edge_alphabet() const;
  bool is_path(const Word& w) const;
  std::vector<int> valences() const;
};

struct InpAnnotation {
  std::string name;
  Word path;
};
struct LinearAnnotation {
  int edge = -1;          // phi(edge) = edge . axis^exponent
  std::string axis;       // name of an INP annotation
  int exponent = 0;
};
struct ExceptionalAnnotation {
  std::string name;       // family x: x_m = e1 axis^m e2bar
  int e1 = -1, e2 = -1;
  std::string axis;
};
struct ConnectingAnnotation {
  std::string name;
  Word path;
};

struct TTAnnotations {
  std::vector<InpAnnotation> inps;
  std::vector<LinearAnnotation> linear_edges;
  std::vector<ExceptionalAnnotation> exceptionals;
  std::vector<ConnectingAnnotation> connectings;
};

// Tightening is free reduction of the edge word.
Word tighten(const Word& path);

class TrainTrackSystem {
 public:
  // Strata listed bottom-up (H_1 first); empty means derive them from the
  // strongly connected components of the edge dependency digraph.
  TrainTrackSystem(MarkedGraph graph, std::vector<Word> edge_map,
                   std::vector<std::vector<int>> strata = {}, TTAnnotations ann = {});

  const MarkedGraph& graph() const { return graph_; }
  const Alphabet& edge_alphabet() const { return alphabet_; }
  const TTAnnotations& annotations() const { return ann_; }

  const Word& image(int edge) const { return edge_map_[edge]; }
  Word image_of_direction(Letter d) const;
  // Concatenated image of a path, not tightened.
  Word image_of_path(const Word& path) const;

  int num_strata() const { return static_cast<int>(strata_.size()); }
  const std::vector<int>& stratum(int i) const { return strata_[i]; }
  int stratum_of(int edge) const { return stratum_of_[edge]; }
  int top_stratum() const { return num_strata() - 1; }
  bool edge_in_top(int edge) const { return stratum_of_[edge] == top_stratum(); }
  bool crosses_top(const Word& path) const;

  // Per-stratum transition block: entries count occurrences in either
  // orientation.
  IMat stratum_block(int i) const;
  bool stratum_irreducible(int i) const;
  bool stratum_zero(int i) const;

  // PF metric: top-stratum edges carry the eigenvector (smallest entry one),
  // everything below has length one.
  double metric(int edge) const;
  double lambda() const;

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  void derive_strata();
  void validate();
  void compute_metric();

  MarkedGraph graph_;
  Alphabet alphabet_;
  std::vector<Word> edge_map_;
  std::vector<std::vector<int>> strata_;
  std::vector<int> stratum_of_;
  TTAnnotations ann_;
  std::vector<double> metric_;
  double lambda_ = 0.0;
  std::vector<std::string> warnings_;
};

// First oriented edge of phi(d).
Letter direction_map(const TrainTrackSystem& tt, Letter d);

struct TurnInfo {
  bool degenerate = false;
  bool illegal = false;
  int steps = 0;  // iterations of the turn map until resolution
};

class TurnClassification {
 public:
  using Key = std::pair<Letter, Letter>;  // normalized by letter_rank
  static Key key(Letter a, Letter b);

  const TurnInfo& info(Letter a, Letter b) const;
  bool is_illegal(Letter a, Letter b) const { return info(a, b).illegal; }
  const std::map<Key, TurnInfo>& table() const { return table_; }

  std::map<Key, TurnInfo> table_;
};

TurnClassification classify_turns(const TrainTrackSystem& tt);

// Number of illegal turns in the path involving at least one top-stratum
// edge; set cyclic for loops (wrap-around turn included).
long long illegal_turn_count(const TrainTrackSystem& tt, const TurnClassification& turns,
                             const Word& path, bool cyclic);

struct RttReport {
  struct Item {
    std::string check;
    bool pass = true;
    std::string detail;
  };
  std::vector<Item> items;
  bool pass = true;
};

RttReport verify_relative_train_track(const TrainTrackSystem& tt, int legal_samples = 50,
                                      unsigned rng_seed = 1);

// True iff [phi(sigma)] == sigma.
bool verify_nielsen(const TrainTrackSystem& tt, const Word& sigma);

// Empirical lower-bound estimate of the bounded cancellation constant: max of
// (L(phi a) + L(phi b) - L([phi(ab)])) / 2 over composable reduced pairs up to
// the probe depth, over phi and phi^2.
double bcc_estimate(const TrainTrackSystem& tt, int probe_depth = 2);

double r_length(const TrainTrackSystem& tt, const Word& path);
double critical_length(const TrainTrackSystem& tt, double bcc);

// One term of a complete splitting.
struct SplitUnit {
  enum class Kind { kEdge, kInp, kConnecting, kExceptional };
  Kind kind = Kind::kEdge;
  Letter edge = 0;       // kEdge
  int index = -1;        // annotation index for the other kinds
  bool inverted = false;
  long long width = 0;   // exceptional width (>= 1)
};

// Greedy complete splitting (exceptional > INP > connecting > edge, longest
// match); with check_legal the turns between consecutive units must be legal,
// otherwise the offending subpath is reported as an incomplete-CT error.
std::vector<SplitUnit> split_into_units(const TrainTrackSystem& tt, const Word& path,
                                        const TurnClassification* turns = nullptr);

// The substitution a completely split train track map induces on the splitting
// units of rho_seed, with exceptional widths capped at N + cap_pad.
class TrainTrackSubstitution {
 public:
  TrainTrackSubstitution(const TrainTrackSystem& tt, Letter seed_direction,
                         long long max_relevant_width, int cap_pad = 1);

  const TrainTrackSystem& tt() const { return *tt_; }
  const Substitution& zeta() const { return zeta_; }
  int seed_letter() const { return seed_letter_; }
  double lambda() const { return lambda_; }
  long long width_cap() const { return width_cap_; }

  int unit_letter(const SplitUnit& u) const;  // -1 when absent from the alphabet
  Word realize_letter(int letter) const;      // edge path of a unit letter
  const std::vector<SplitUnit>& units() const { return units_; }

  // Multiset r~(gamma): unit words whose occurrences in the unit sequence of
  // rho_seed biject with occurrences of gamma, with multiplicities.
  std::vector<std::pair<Word, long long>> r_tilde(const Word& gamma) const;

  // d_{gamma, seed} = sum of nu_w * d_w over r~(gamma).
  double path_frequency(const Word& gamma) const;

  // d-value of a unit word (frequency in the unit sequence of rho_seed).
  double word_frequency(const Word& unit_word) const;

 private:
  void discover_alphabet();
  void build_rules();

  const TrainTrackSystem* tt_;
  Letter seed_dir_;
  int cap_pad_;
  long long width_cap_;
  TurnClassification turns_;
  std::vector<SplitUnit> units_;           // per letter
  std::map<std::string, int> letter_of_;   // by rendered unit name
  Substitution zeta_{Alphabet({}, false), {}};
  int seed_letter_ = -1;
  double lambda_ = 0.0;
  mutable std::map<int, std::map<Word, double>> freq_cache_;  // by word length
};

struct AdapterResult {
  TrainTrackSubstitution sub;
  std::vector<std::pair<Word, long long>> r_tilde;
  double frequency = 0.0;
};

// Prop-style entry point: alphabet, substitution and r~(gamma) for one target
// path, with the cap N computed from gamma, the edge images and the connecting
// annotations.
AdapterResult to_substitution(const TrainTrackSystem& tt, const Word& gamma, Letter seed_direction,
                              int cap_pad = 1);

// Frequencies of gamma computed with caps N + 1 and N + C agree within tol.
bool width_cap_stability(const TrainTrackSystem& tt, const Word& gamma, Letter seed_direction,
                         int c, double tol = 1e-9);

// Largest exceptional width gamma interacts with, over all families.
long long max_relevant_width(const TrainTrackSystem& tt, const Word& gamma);

}  // namespace relcur
