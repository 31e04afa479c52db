#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "relcur/words.hpp"

namespace relcur {

// Vertices are the 2n letter directions, indexed by letter_rank; parallel
// edges are kept.
struct WhiteheadGraph {
  int n_letters = 0;
  std::vector<std::pair<int, int>> edges;

  int num_vertices() const { return 2 * n_letters; }
  // Deduplicated adjacency lists.
  std::vector<std::vector<int>> adjacency() const;
};

// Edge {xbar, y} for every cyclic factor xy of every class and its inverse.
WhiteheadGraph whitehead_graph(const std::vector<CyclicWord>& classes, int n_letters);

// Component id per vertex (isolated vertices count as components).
std::vector<int> connected_components(const WhiteheadGraph& g);
bool is_connected(const WhiteheadGraph& g);

// First articulation point in vertex order, if any.
std::optional<int> cut_vertex(const WhiteheadGraph& g);

// Whitehead automorphism of the second kind, given by a multiplier direction
// m and a direction set S with m in S, mbar not in S:
//   x  |->  [mbar if x in S] x [m if xbar in S]   for letters x != base(m).
struct WhiteheadMove {
  Letter multiplier = 0;
  std::vector<Letter> set;  // S, including the multiplier
};

Word apply_whitehead(const WhiteheadMove& t, const Word& w);
CyclicWord apply_whitehead_cyclic(const WhiteheadMove& t, const CyclicWord& alpha);

// Every non-trivial move over n letters (no factor constraints).
std::vector<WhiteheadMove> all_whitehead_moves(int n_letters);

// Moves keeping every factor of the system invariant up to conjugacy: a
// factor not containing the multiplier letter must have its directions
// entirely inside or entirely outside S.
std::vector<WhiteheadMove> a_preserving_moves(const FreeFactorSystem& ffs);

// Default filling class of a factor: the generator for rank one, a chained
// commutator word for higher rank.  Must pass verify_filling.
CyclicWord default_filler(const FreeFactorSystem& ffs, int factor);

// A class fills its factor when it uses only factor letters and its Whitehead
// graph on the factor's directions is connected without cut vertices (rank-one
// factors: a power of the generator).
bool verify_filling(const CyclicWord& filler, const FreeFactorSystem& ffs, int factor);

// Relative Whitehead graph of {alpha, fillers}; throws on a non-filling filler.
WhiteheadGraph relative_whitehead_graph(const CyclicWord& alpha, const FreeFactorSystem& ffs,
                                        const std::vector<CyclicWord>& fillers);

struct SeparabilityVerdict {
  enum class Kind { kSeparable, kNotSeparable, kInconclusive };
  Kind kind = Kind::kInconclusive;

  // Separable: the recorded automorphisms take alpha inside <part_one>, with
  // every factor of A wholly inside one part and part_two nonempty.
  std::vector<WhiteheadMove> moves;
  std::vector<int> part_one, part_two;  // positive letter indices
  Word transformed_alpha;

  // NotSeparable: connected relative Whitehead graph with no cut vertex.
  WhiteheadGraph certificate;

  long long expansions = 0;
};

struct SeparabilityOptions {
  long long budget = 1'000'000;  // node expansions
  std::vector<CyclicWord> fillers;  // default fillers when empty
};

// Decides A-separability by Whitehead reduction over A-preserving moves with
// Stallings cut-vertex certificates; Inconclusive absorbs budget exhaustion.
SeparabilityVerdict decide_separable(const CyclicWord& alpha, const FreeFactorSystem& ffs,
                                     const SeparabilityOptions& opts = {});

// Current-flavored alias: [eta_alpha] lies in MRC(A) iff alpha is A-separable.
SeparabilityVerdict mrc_membership(const CyclicWord& alpha, const FreeFactorSystem& ffs,
                                   const SeparabilityOptions& opts = {});

}  // namespace relcur
