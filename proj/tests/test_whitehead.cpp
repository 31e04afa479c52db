#include <doctest.h>

#include <functional>
#include <random>
#include <set>

#include "relcur/currents.hpp"
#include "relcur/whitehead.hpp"

using namespace relcur;

namespace {

struct F2Setup {
  Alphabet ab{{"a", "b"}, true};
  FreeFactorSystem ffs{ab, {{0}}};
};

struct F4Setup {
  Alphabet ab{{"a", "b", "c", "d"}, true};
  FreeFactorSystem ffs{ab, {{0, 1}}};
};

CyclicWord cw(const Alphabet& ab, const std::string& s) {
  return CyclicWord(ab.parse_word(s));
}

// delete-and-recount articulation oracle
bool is_cut_vertex_oracle(const WhiteheadGraph& g, int v) {
  auto adj = g.adjacency();
  auto count_components = [&](int skip) {
    std::vector<int> comp(g.num_vertices(), -1);
    int n_comp = 0;
    for (int s = 0; s < g.num_vertices(); ++s) {
      if (s == skip || comp[s] != -1) continue;
      comp[s] = n_comp;
      std::vector<int> stack{s};
      while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (int w : adj[x]) {
          if (w == skip || comp[w] != -1) continue;
          comp[w] = n_comp;
          stack.push_back(w);
        }
      }
      ++n_comp;
    }
    return n_comp;
  };
  return count_components(v) > count_components(-1);
}

// Brute-force Whitehead-orbit separability oracle for a collection: BFS over
// all (unrestricted) moves without increasing total length; separable iff some
// reachable collection splits its positive-letter support.
bool orbit_separable_oracle(const std::vector<CyclicWord>& collection, int n_letters) {
  auto moves = all_whitehead_moves(n_letters);
  auto key_of = [](const std::vector<CyclicWord>& c) {
    std::vector<Word> key;
    for (const auto& x : c) {
      CyclicWord inv = x.inverse_class();
      key.push_back(inv < x ? inv.letters() : x.letters());
    }
    std::sort(key.begin(), key.end());
    return key;
  };
  auto visible_split = [&](const std::vector<CyclicWord>& c) {
    // union-find over positive letters via co-occurrence inside classes
    std::vector<int> parent(n_letters);
    for (int i = 0; i < n_letters; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (const auto& x : c) {
      int first = -1;
      for (Letter l : x.letters()) {
        int i = letter_index(l);
        if (first == -1)
          first = i;
        else
          parent[find(i)] = find(first);
      }
    }
    std::set<int> roots;
    for (int i = 0; i < n_letters; ++i) roots.insert(find(i));
    return roots.size() >= 2;
  };
  long long start_len = 0;
  for (const auto& x : collection) start_len += x.size();
  std::set<std::vector<Word>> visited;
  std::vector<std::vector<CyclicWord>> queue{collection};
  visited.insert(key_of(collection));
  while (!queue.empty()) {
    auto cur = queue.back();
    queue.pop_back();
    if (visible_split(cur)) return true;
    long long len = 0;
    for (const auto& x : cur) len += x.size();
    for (const auto& t : moves) {
      std::vector<CyclicWord> next;
      long long next_len = 0;
      for (const auto& x : cur) {
        next.push_back(apply_whitehead_cyclic(t, x));
        next_len += next.back().size();
      }
      if (next_len > len) continue;
      auto k = key_of(next);
      if (visited.insert(k).second) queue.push_back(std::move(next));
    }
  }
  return false;
}

}  // namespace

TEST_CASE("whitehead graphs of basic classes") {
  F2Setup s;
  auto g = whitehead_graph({cw(s.ab, "abAB")}, 2);
  CHECK(is_connected(g));
  CHECK(!cut_vertex(g).has_value());

  auto ga = whitehead_graph({cw(s.ab, "a")}, 2);
  auto comp = connected_components(ga);
  CHECK(comp[0] == comp[1]);  // a joined to A
  CHECK(comp[2] != comp[0]);  // b isolated
  CHECK(!is_connected(ga));

  auto gab = whitehead_graph({cw(s.ab, "ab")}, 2);
  CHECK(!is_connected(gab));  // components {A,b} and {B,a}
}

TEST_CASE("cut vertices on small graphs") {
  WhiteheadGraph path;
  path.n_letters = 2;  // vertices 0..3
  path.edges = {{0, 1}, {1, 2}, {2, 3}};
  auto v = cut_vertex(path);
  REQUIRE(v.has_value());
  CHECK(*v == 1);  // first articulation in vertex order

  WhiteheadGraph cycle;
  cycle.n_letters = 2;
  cycle.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  CHECK(!cut_vertex(cycle).has_value());
}

TEST_CASE("cut vertex agrees with the delete-and-recount oracle") {
  std::mt19937 rng(808);
  for (int trial = 0; trial < 80; ++trial) {
    WhiteheadGraph g;
    g.n_letters = 2 + trial % 5;  // up to 12 vertices
    int n = g.num_vertices();
    std::uniform_int_distribution<int> vd(0, n - 1);
    std::uniform_int_distribution<int> ed(n - 1, 2 * n);
    int m = ed(rng);
    for (int e = 0; e < m; ++e) g.edges.emplace_back(vd(rng), vd(rng));
    auto got = cut_vertex(g);
    std::optional<int> expected;
    for (int v = 0; v < n && !expected; ++v)
      if (is_cut_vertex_oracle(g, v)) expected = v;
    CHECK(got == expected);
  }
}

TEST_CASE("whitehead move application matches a hand-computed image") {
  // multiplier a with S = {a, b, B, c, d, D} sends cadb to a conjugate of cdb
  Alphabet ab({"a", "b", "c", "d"}, true);
  WhiteheadMove t;
  t.multiplier = ab.letter("a");
  t.set = {ab.letter("a"), ab.letter("b"), inverse(ab.letter("b")), ab.letter("c"),
           ab.letter("d"), inverse(ab.letter("d"))};
  CHECK(apply_whitehead(t, ab.parse_word("b")) == ab.parse_word("Aba"));
  CHECK(apply_whitehead(t, ab.parse_word("c")) == ab.parse_word("Ac"));
  CHECK(apply_whitehead(t, ab.parse_word("d")) == ab.parse_word("Ada"));
  CHECK(apply_whitehead_cyclic(t, CyclicWord(ab.parse_word("cadb"))) ==
        CyclicWord(ab.parse_word("cdb")));
}

TEST_CASE("default fillers fill their factors") {
  F4Setup t;
  auto filler = default_filler(t.ffs, 0);
  CHECK(filler == cw(t.ab, "abAB"));
  CHECK(verify_filling(filler, t.ffs, 0));
  CHECK(verify_filling(cw(t.ab, "aabb"), t.ffs, 0));
  CHECK(!verify_filling(cw(t.ab, "ab"), t.ffs, 0));   // splits as <a>*<b>
  CHECK(!verify_filling(cw(t.ab, "acb"), t.ffs, 0));  // leaves the factor

  Alphabet big({"a", "b", "c", "x"}, true);
  FreeFactorSystem ffs3(big, {{0, 1, 2}});
  CHECK(verify_filling(default_filler(ffs3, 0), ffs3, 0));

  F2Setup s;
  CHECK(default_filler(s.ffs, 0) == cw(s.ab, "a"));
  CHECK(verify_filling(cw(s.ab, "a"), s.ffs, 0));
}

TEST_CASE("relative whitehead graph of the commutator") {
  F2Setup s;
  auto g = relative_whitehead_graph(cw(s.ab, "abAB"), s.ffs, {cw(s.ab, "a")});
  CHECK(is_connected(g));
  CHECK(!cut_vertex(g).has_value());
  CHECK_THROWS_AS(relative_whitehead_graph(cw(s.ab, "b"), s.ffs, {cw(s.ab, "ab")}),
                  PreconditionError);
}

TEST_CASE("decide_separable on the three benchmark classes") {
  F2Setup s;
  auto v1 = decide_separable(cw(s.ab, "ab"), s.ffs);
  CHECK(v1.kind == SeparabilityVerdict::Kind::kSeparable);
  CHECK(!v1.part_two.empty());

  auto v2 = decide_separable(cw(s.ab, "abAB"), s.ffs);
  CHECK(v2.kind == SeparabilityVerdict::Kind::kNotSeparable);
  CHECK(is_connected(v2.certificate));

  F4Setup t;
  auto v3 = decide_separable(cw(t.ab, "cd"), t.ffs);
  CHECK(v3.kind == SeparabilityVerdict::Kind::kSeparable);
  // witness: {c,d} versus {a,b}
  CHECK(v3.part_one == std::vector<int>{2, 3});
  CHECK(v3.part_two == std::vector<int>{0, 1});
}

TEST_CASE("decide_separable rejects classes inside A") {
  F2Setup s;
  CHECK_THROWS_AS(decide_separable(cw(s.ab, "a"), s.ffs), PreconditionError);
}

TEST_CASE("separability agrees with the orbit oracle on short words") {
  F2Setup s;
  std::set<Word> seen;
  long long checked = 0;
  for (int len = 1; len <= 4; ++len) {
    for (const Word& w : reduced_words(2, len)) {
      // skip non-cyclically-reduced and A-words
      if (w.size() >= 2 && w.front() == inverse(w.back())) continue;
      bool pure_a = true;
      for (Letter l : w) pure_a = pure_a && letter_index(l) == 0;
      if (pure_a) continue;
      CyclicWord alpha(w);
      if (!seen.insert(alpha.letters()).second) continue;
      auto verdict = decide_separable(alpha, s.ffs);
      bool oracle = orbit_separable_oracle({alpha, cw(s.ab, "a")}, 2);
      ++checked;
      if (verdict.kind == SeparabilityVerdict::Kind::kSeparable) CHECK(oracle);
      if (verdict.kind == SeparabilityVerdict::Kind::kNotSeparable) CHECK(!oracle);
      CHECK(verdict.kind != SeparabilityVerdict::Kind::kInconclusive);
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("verdicts are independent of the filler choice") {
  F4Setup t;
  for (const std::string cls : {"cd", "cadb", "cabdCABD"}) {
    auto va = decide_separable(cw(t.ab, cls), t.ffs,
                               {.fillers = {cw(t.ab, "abAB")}});
    auto vb = decide_separable(cw(t.ab, cls), t.ffs,
                               {.fillers = {cw(t.ab, "aabb")}});
    CHECK(va.kind == vb.kind);
  }
}

TEST_CASE("budget exhaustion yields inconclusive") {
  F2Setup s;
  SeparabilityOptions opts;
  opts.budget = 1;  // the winning move needs at least one expansion beyond the root
  auto verdict = decide_separable(cw(s.ab, "aab"), s.ffs, opts);
  CHECK(verdict.kind == SeparabilityVerdict::Kind::kInconclusive);
}

TEST_CASE("mrc membership mirrors separability") {
  F2Setup s;
  CHECK(mrc_membership(cw(s.ab, "ab"), s.ffs).kind == SeparabilityVerdict::Kind::kSeparable);
  CHECK(mrc_membership(cw(s.ab, "abAB"), s.ffs).kind ==
        SeparabilityVerdict::Kind::kNotSeparable);
}
