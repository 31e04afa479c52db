#include "relcur/currents.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>

#include "relcur/eigen.hpp"
#include "relcur/errors.hpp"

namespace relcur {

namespace {

bool rank_less(const Word& a, const Word& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [](Letter x, Letter y) { return letter_rank(x) < letter_rank(y); });
}

}  // namespace

Word RelativeCurrent::canonical(const Word& w) {
  Word inv = invert(w);
  return rank_less(inv, w) ? inv : w;
}

RelativeCurrent::RelativeCurrent(const FreeFactorSystem& ffs, int depth)
    : ffs_(&ffs), depth_(depth) {}

double RelativeCurrent::value(const Word& w) const {
  auto it = table_.find(canonical(w));
  return it == table_.end() ? 0.0 : it->second;
}

void RelativeCurrent::set(const Word& w, double v) { table_[canonical(w)] = v; }

void RelativeCurrent::add(const Word& w, double v) { table_[canonical(w)] += v; }

std::vector<Word> reduced_words(int n_letters, int length) {
  std::vector<Word> out;
  if (length == 0) {
    out.push_back({});
    return out;
  }
  std::vector<Word> frontier{{}};
  for (int l = 0; l < length; ++l) {
    std::vector<Word> next;
    for (const Word& w : frontier) {
      for (int i = 1; i <= n_letters; ++i) {
        for (Letter e : {static_cast<Letter>(i), static_cast<Letter>(-i)}) {
          if (!w.empty() && w.back() == inverse(e)) continue;
          Word v = w;
          v.push_back(e);
          next.push_back(std::move(v));
        }
      }
    }
    frontier = std::move(next);
  }
  return frontier;
}

std::vector<Word> current_domain(const FreeFactorSystem& ffs, int depth) {
  std::vector<Word> out;
  const int n = ffs.alphabet().size();
  for (int l = 1; l <= depth; ++l) {
    for (const Word& w : reduced_words(n, l)) {
      if (!ffs.in_f_minus_a(w)) continue;
      if (RelativeCurrent::canonical(w) != w) continue;
      out.push_back(w);
    }
  }
  return out;
}

RelativeCurrent rational_current(const CyclicWord& alpha, const FreeFactorSystem& ffs, int depth) {
  if (ffs.factor_of(alpha.letters()).has_value())
    throw PreconditionError("rational_current: class lies inside a free factor of A");
  RelativeCurrent eta(ffs, depth);
  for (const Word& w : current_domain(ffs, depth))
    eta.set(w, static_cast<double>(count_cyclic(w, alpha, true)));
  return eta;
}

RelativeCurrent normalize(const RelativeCurrent& eta) {
  double mx = 0;
  for (const Word& u : eta.ffs().b_a_set()) mx = std::max(mx, eta.value(u));
  if (mx <= 0)
    throw PreconditionError("normalize: current vanishes on all of B_A");
  RelativeCurrent out(eta.ffs(), eta.depth());
  for (const auto& [w, v] : eta.table()) out.set(w, v / mx);
  return out;
}

double current_distance(const RelativeCurrent& eta1, const RelativeCurrent& eta2,
                        const std::vector<Word>& window) {
  if (&eta1.ffs() != &eta2.ffs() && !(eta1.ffs().alphabet() == eta2.ffs().alphabet()))
    throw PreconditionError("current_distance: mismatched free factor systems");
  double d = 0;
  for (const Word& w : window) d = std::max(d, std::fabs(eta1.value(w) - eta2.value(w)));
  return d;
}

SignedMeasuredCurrent::SignedMeasuredCurrent(const FreeFactorSystem& ffs, int depth)
    : ffs_(&ffs), depth_(depth) {}

double SignedMeasuredCurrent::value(const Word& w) const {
  auto it = table_.find(RelativeCurrent::canonical(w));
  return it == table_.end() ? 0.0 : it->second;
}

void SignedMeasuredCurrent::set(const Word& w, double v) {
  table_[RelativeCurrent::canonical(w)] = v;
}

void SignedMeasuredCurrent::add(const Word& w, double v) {
  table_[RelativeCurrent::canonical(w)] += v;
}

double SignedMeasuredCurrent::additivity_residual() const {
  const int n = ffs_->alphabet().size();
  double worst = 0;
  for (const auto& [w, v] : table_) {
    if (static_cast<int>(w.size()) >= depth_) continue;
    double fwd = 0, bwd = 0;
    for (int i = 1; i <= n; ++i) {
      for (Letter e : {static_cast<Letter>(i), static_cast<Letter>(-i)}) {
        if (w.back() != inverse(e)) {
          Word we = w;
          we.push_back(e);
          fwd += value(we);
        }
        if (w.front() != inverse(e)) {
          Word ew;
          ew.push_back(e);
          ew.insert(ew.end(), w.begin(), w.end());
          bwd += value(ew);
        }
      }
    }
    worst = std::max({worst, std::fabs(v - fwd), std::fabs(v - bwd)});
  }
  return worst;
}

namespace {

// Reduced words of the given length over one factor's letters.
std::vector<Word> factor_words(const FreeFactorSystem& ffs, int factor, int length) {
  std::vector<Word> frontier{{}};
  for (int l = 0; l < length; ++l) {
    std::vector<Word> next;
    for (const Word& w : frontier) {
      for (int i : ffs.factor(factor)) {
        for (Letter e : {static_cast<Letter>(i + 1), static_cast<Letter>(-(i + 1))}) {
          if (!w.empty() && w.back() == inverse(e)) continue;
          Word v = w;
          v.push_back(e);
          next.push_back(std::move(v));
        }
      }
    }
    frontier = std::move(next);
  }
  return frontier;
}

}  // namespace

SignedMeasuredCurrent k_extension(const RelativeCurrent& eta0, int k,
                                  const std::map<int, double>& seeds, ExtensionReport* report,
                                  double tol) {
  const FreeFactorSystem& ffs = eta0.ffs();
  if (k < 1) throw PreconditionError("k_extension: k >= 1 required");
  if (k > eta0.depth())
    throw PreconditionError("k_extension: depth of the input current is too small");
  const int n = ffs.alphabet().size();
  SignedMeasuredCurrent out(ffs, k);

  // Non-A words come straight from eta0; factor letters from the seeds.
  for (int l = 1; l <= k; ++l)
    for (const Word& w : reduced_words(n, l))
      if (ffs.in_f_minus_a(w) && RelativeCurrent::canonical(w) == w) out.set(w, eta0.value(w));
  for (int f = 0; f < ffs.num_factors(); ++f) {
    for (int i : ffs.factor(f)) {
      auto it = seeds.find(i);
      out.set({static_cast<Letter>(i + 1)}, it == seeds.end() ? 0.0 : it->second);
    }
  }

  ExtensionReport local;
  for (int level = 2; level <= k; ++level) {
    for (int f = 0; f < ffs.num_factors(); ++f) {
      std::vector<Word> rows = factor_words(ffs, f, level - 1);
      std::vector<Word> unknowns;
      std::map<Word, int> unknown_index;
      for (const Word& w : factor_words(ffs, f, level)) {
        Word key = RelativeCurrent::canonical(w);
        if (!unknown_index.count(key)) {
          unknown_index[key] = static_cast<int>(unknowns.size());
          unknowns.push_back(key);
        }
      }
      if (rows.empty() || unknowns.empty()) continue;

      std::vector<bool> in_factor(n, false);
      for (int i : ffs.factor(f)) in_factor[i] = true;

      DMat m(static_cast<int>(rows.size()), static_cast<int>(unknowns.size()));
      std::vector<double> c(rows.size(), 0.0);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const Word& v = rows[r];
        double cv = out.value(v);
        for (int i = 1; i <= n; ++i) {
          for (Letter e : {static_cast<Letter>(i), static_cast<Letter>(-i)}) {
            if (v.back() == inverse(e)) continue;
            Word ve = v;
            ve.push_back(e);
            if (in_factor[i - 1]) {
              m(static_cast<int>(r), unknown_index.at(RelativeCurrent::canonical(ve))) += 1.0;
            } else {
              cv -= eta0.value(ve);
            }
          }
        }
        c[r] = cv;
      }

      // Generating relations among the rows: sums over one-letter factor
      // prefixes of u and of u-bar must agree, in both coefficients and
      // constants.
      std::map<Word, int> row_index;
      for (std::size_t r = 0; r < rows.size(); ++r) row_index[rows[r]] = static_cast<int>(r);
      for (const Word& u : factor_words(ffs, f, level - 2)) {
        std::vector<double> lhs(unknowns.size(), 0.0), rhs(unknowns.size(), 0.0);
        double lc = 0, rc = 0;
        Word ubar = invert(u);
        for (int i : ffs.factor(f)) {
          for (Letter x : {static_cast<Letter>(i + 1), static_cast<Letter>(-(i + 1))}) {
            if (u.empty() || u.front() != inverse(x)) {
              Word xu{x};
              xu.insert(xu.end(), u.begin(), u.end());
              int r = row_index.at(xu);
              for (std::size_t j = 0; j < unknowns.size(); ++j) lhs[j] += m(r, static_cast<int>(j));
              lc += c[r];
            }
            if (ubar.empty() || ubar.front() != inverse(x)) {
              Word xu{x};
              xu.insert(xu.end(), ubar.begin(), ubar.end());
              int r = row_index.at(xu);
              for (std::size_t j = 0; j < unknowns.size(); ++j) rhs[j] += m(r, static_cast<int>(j));
              rc += c[r];
            }
          }
        }
        for (std::size_t j = 0; j < unknowns.size(); ++j) {
          if (std::fabs(lhs[j] - rhs[j]) > 1e-9)
            throw InternalError("k_extension: generating row relation violated");
        }
        local.max_consistency_residual = std::max(local.max_consistency_residual, std::fabs(lc - rc));
        if (std::fabs(lc - rc) > std::max(tol, 1e-9) * std::max(1.0, std::fabs(lc)) * 10)
          throw InternalError("k_extension: inconsistent constants in the extension system");
      }

      double res = 0;
      std::vector<double> x = solve_min_norm(m, c, 1e-12, &res);
      local.max_solve_residual = std::max(local.max_solve_residual, res);
      for (std::size_t j = 0; j < unknowns.size(); ++j) out.set(unknowns[j], x[j]);
    }
    ++local.levels;
  }
  if (report) *report = local;
  return out;
}

SignedMeasuredCurrent nonnegative_fix(const SignedMeasuredCurrent& eta, NonnegativeFixInfo* info) {
  const FreeFactorSystem& ffs = eta.ffs();
  const int k = eta.depth();
  SignedMeasuredCurrent out = eta;
  NonnegativeFixInfo local;
  for (int f = 0; f < ffs.num_factors(); ++f) {
    int s = static_cast<int>(ffs.factor(f).size());
    double worst = 0.0;
    for (int l = 1; l <= k; ++l)
      for (const Word& w : factor_words(ffs, f, l)) worst = std::min(worst, eta.value(w));
    double m = std::max(0.0, -worst);
    double c = m * std::pow(2.0 * s - 1.0, k - 1);
    local.correction.push_back(c);
    if (c == 0.0) continue;
    for (int l = 1; l <= k; ++l) {
      double bump = c / std::pow(2.0 * s - 1.0, l - 1);
      for (const Word& w : factor_words(ffs, f, l))
        if (RelativeCurrent::canonical(w) == w) out.add(w, bump);
    }
  }
  if (info) *info = local;
  return out;
}

BigUInt approximation_constant(int rank, int k) {
  if (k < 2) throw PreconditionError("approximation_constant: k >= 2 required");
  const std::uint64_t base = 2ull * rank - 1;
  // exponent E = 2n (2n-1)^(k-2), with an overflow guard
  std::uint64_t e = 2ull * rank;
  for (int i = 0; i < k - 2; ++i) {
    if (e > (1ull << 62) / base) throw PreconditionError("approximation_constant: k too large");
    e *= base;
  }
  BigUInt p = BigUInt::power(base, e);
  p.mul_small(2ull * rank);
  return p;
}

namespace {

struct WordGraph {
  int n_letters;
  int k;
  std::vector<Word> vertices;                       // reduced words of length k-1
  std::map<Word, int> vertex_index;
  // directed edges: word w of length k goes prefix -> suffix
  struct Edge {
    Word word;
    int from, to;
  };
  std::vector<Edge> edges;                          // sorted by word (lexicographic)
  std::vector<std::vector<int>> out_edges;          // per vertex, ascending edge ids
};

WordGraph build_graph(int n_letters, int k) {
  WordGraph g;
  g.n_letters = n_letters;
  g.k = k;
  g.vertices = reduced_words(n_letters, k - 1);
  std::sort(g.vertices.begin(), g.vertices.end(), rank_less);
  for (int i = 0; i < static_cast<int>(g.vertices.size()); ++i) g.vertex_index[g.vertices[i]] = i;
  std::vector<Word> words = reduced_words(n_letters, k);
  std::sort(words.begin(), words.end(), rank_less);
  g.out_edges.assign(g.vertices.size(), {});
  for (const Word& w : words) {
    Word pre(w.begin(), w.end() - 1);
    Word suf(w.begin() + 1, w.end());
    WordGraph::Edge e{w, g.vertex_index.at(pre), g.vertex_index.at(suf)};
    g.out_edges[e.from].push_back(static_cast<int>(g.edges.size()));
    g.edges.push_back(std::move(e));
  }
  return g;
}

}  // namespace

ApproximationResult approximate_by_rationals(const RelativeCurrent& eta0,
                                             const ApproximationConfig& cfg) {
  const FreeFactorSystem& ffs = eta0.ffs();
  const int n = ffs.alphabet().size();
  const int k = cfg.k;
  if (k < 2) throw PreconditionError("approximate_by_rationals: k >= 2 required");
  const double r_scale = cfg.scale;
  BigUInt p_big = approximation_constant(n, k);
  const double p = p_big.to_double();

  bool applicable = false;
  for (const Word& w : current_domain(ffs, k))
    if (static_cast<int>(w.size()) == k && eta0.value(w) * r_scale >= p) applicable = true;
  if (!applicable)
    throw PreconditionError(
        "approximate_by_rationals: R*eta0 < P on every depth-k word; increase the scale R");

  SignedMeasuredCurrent ext = nonnegative_fix(k_extension(eta0, k));

  WordGraph g = build_graph(n, k);
  // mu on canonical depth-k words
  std::map<Word, double> mu;
  for (const auto& e : g.edges) {
    Word key = RelativeCurrent::canonical(e.word);
    if (!mu.count(key)) mu[key] = r_scale * ext.value(key);
  }

  // mu on shorter words via forward extension sums (mu stays additive).
  std::function<double(const Word&)> mu_value = [&](const Word& w) -> double {
    if (static_cast<int>(w.size()) == k) return mu.at(RelativeCurrent::canonical(w));
    double s = 0;
    for (int i = 1; i <= n; ++i)
      for (Letter e : {static_cast<Letter>(i), static_cast<Letter>(-i)}) {
        if (w.back() == inverse(e)) continue;
        Word we = w;
        we.push_back(e);
        s += mu_value(we);
      }
    return s;
  };

  ApproximationResult result;
  result.p_value = p;
  result.bound = p / r_scale;

  auto pick_target = [&]() -> std::optional<Word> {
    std::optional<Word> fallback;
    for (int l = k; l >= 1; --l) {
      for (const Word& w : reduced_words(n, l)) {
        if (RelativeCurrent::canonical(w) != w) continue;
        if (mu_value(w) < p) continue;
        if (ffs.in_f_minus_a(w)) return w;
        if (!fallback) fallback = w;
      }
      if (fallback) break;  // prefer longer targets; F-minus-A first within a length
    }
    return fallback;
  };

  const double eps = 1e-9;
  int guard = 0;
  for (;;) {
    if (++guard > 5'000'000) throw InternalError("approximate_by_rationals: extraction stalled");
    std::optional<Word> target_opt = pick_target();
    if (!target_opt) break;
    Word target = *target_opt;
    // A short target delegates to its heaviest depth-k extension edge.
    while (static_cast<int>(target.size()) < k) {
      Word best;
      double best_mu = -1;
      for (int i = 1; i <= n; ++i)
        for (Letter e : {static_cast<Letter>(i), static_cast<Letter>(-i)}) {
          if (target.back() == inverse(e)) continue;
          Word we = target;
          we.push_back(e);
          double v = mu_value(we);
          if (v > best_mu) {
            best_mu = v;
            best = we;
          }
        }
      target = best;
    }

    // Shortest cycle through the target edge: BFS suffix -> prefix over edges
    // with enough integral weight, edges scanned in lexicographic order.
    std::map<Word, int> need;  // per canonical word, uses already demanded
    need[RelativeCurrent::canonical(target)] = 1;
    std::vector<Word> cycle_words;
    bool extracted = false;
    for (int attempt = 0; attempt < 40 && !extracted; ++attempt) {
      auto usable = [&](const WordGraph::Edge& e) {
        Word key = RelativeCurrent::canonical(e.word);
        auto it = need.find(key);
        int demanded = it == need.end() ? 0 : it->second;
        return std::floor(mu.at(key) + eps) >= demanded + 1;
      };
      int start = g.vertex_index.at(Word(target.begin() + 1, target.end()));
      int goal = g.vertex_index.at(Word(target.begin(), target.end() - 1));
      std::vector<int> parent_edge(g.vertices.size(), -1);
      std::vector<bool> seen(g.vertices.size(), false);
      std::deque<int> queue;
      seen[start] = true;
      queue.push_back(start);
      bool found = seen[goal];
      while (!queue.empty() && !found) {
        int v = queue.front();
        queue.pop_front();
        for (int eid : g.out_edges[v]) {
          const auto& e = g.edges[eid];
          if (seen[e.to] || !usable(e)) continue;
          seen[e.to] = true;
          parent_edge[e.to] = eid;
          if (e.to == goal) {
            found = true;
            break;
          }
          queue.push_back(e.to);
        }
      }
      if (!found) break;
      cycle_words.clear();
      cycle_words.push_back(target);
      for (int v = goal; v != start;) {
        const auto& e = g.edges[parent_edge[v]];
        cycle_words.push_back(e.word);
        v = e.from;
      }
      std::reverse(cycle_words.begin() + 1, cycle_words.end());

      // cyclic word: last letters of the cycle's edges
      Word alpha_word;
      for (const Word& w : cycle_words) alpha_word.push_back(w.back());
      CyclicWord alpha(alpha_word);

      // feasibility of subtracting eta_alpha at depth k
      std::map<Word, long long> counts;
      for (const auto& [key, value] : mu) {
        long long cnt = count_cyclic(key, alpha, true);
        if (cnt > 0) counts[key] = cnt;
      }
      bool feasible = true;
      for (const auto& [key, cnt] : counts) {
        if (mu.at(key) + eps < static_cast<double>(cnt)) {
          feasible = false;
          need[key] = std::max(need[key], static_cast<int>(cnt));
        }
      }
      if (!feasible) continue;
      for (const auto& [key, cnt] : counts) mu[key] -= static_cast<double>(cnt);
      result.classes.push_back(alpha);
      result.in_f_minus_a.push_back(ffs.in_f_minus_a(alpha.letters()));
      extracted = true;
    }
    if (!extracted)
      throw InternalError("approximate_by_rationals: no feasible cycle through a heavy word");
  }

  if (cfg.concatenate && cfg.concatenate_m >= 1) {
    Word beta;
    for (std::size_t i = 0; i < result.classes.size(); ++i) {
      if (!result.in_f_minus_a[i]) continue;
      for (int rep = 0; rep < cfg.concatenate_m; ++rep) {
        const Word& w = result.classes[i].letters();
        beta.insert(beta.end(), w.begin(), w.end());
      }
    }
    if (!beta.empty()) result.concatenated = cyclic_reduce(beta).core;
  }

  // Achieved deviation on the F-minus-A window, all lengths up to k.
  for (const Word& w : current_domain(ffs, k)) {
    double sum = 0;
    for (std::size_t i = 0; i < result.classes.size(); ++i) {
      if (!result.in_f_minus_a[i]) continue;
      sum += static_cast<double>(count_cyclic(w, result.classes[i], true));
    }
    result.achieved_error =
        std::max(result.achieved_error, std::fabs(eta0.value(w) - sum / r_scale));
  }
  return result;
}

}  // namespace relcur
