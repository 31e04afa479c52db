#include "relcur/substitution.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>
#include <sstream>

#include "relcur/errors.hpp"
#include "relcur/kernels.hpp"

namespace relcur {

Substitution::Substitution(Alphabet alphabet, std::vector<Word> rules)
    : alphabet_(std::move(alphabet)), rules_(std::move(rules)) {
  if (static_cast<int>(rules_.size()) != alphabet_.size())
    throw PreconditionError("substitution: one rule per letter required");
  for (int i = 0; i < alphabet_.size(); ++i) {
    if (rules_[i].empty())
      throw PreconditionError("substitution: empty image for letter '" + alphabet_.name(i) + "'");
    for (Letter l : rules_[i]) {
      if (l <= 0 || letter_index(l) >= alphabet_.size())
        throw PreconditionError("substitution: undeclared letter in image of '" +
                                alphabet_.name(i) + "'");
    }
  }
}

Word Substitution::apply(const Word& w) const {
  Word out;
  std::size_t total = 0;
  for (Letter l : w) {
    if (l <= 0 || letter_index(l) >= size())
      throw PreconditionError("substitution: undeclared letter in argument");
    total += rules_[letter_index(l)].size();
  }
  out.reserve(total);
  for (Letter l : w) {
    const Word& r = rules_[letter_index(l)];
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

Word Substitution::apply_n(const Word& w, int n) const {
  Word out = w;
  for (int i = 0; i < n; ++i) out = apply(out);
  return out;
}

Substitution Substitution::power(int n) const {
  if (n < 1) throw PreconditionError("substitution power: n >= 1 required");
  std::vector<Word> rules;
  rules.reserve(size());
  for (int i = 0; i < size(); ++i) rules.push_back(apply_n({static_cast<Letter>(i + 1)}, n));
  return Substitution(alphabet_, std::move(rules));
}

TransitionMatrix transition_matrix(const Substitution& z) {
  const int n = z.size();
  TransitionMatrix t;
  t.m = IMat(n, n);
  for (int b = 0; b < n; ++b)
    for (Letter l : z.rule(b)) t.m(letter_index(l), b) += 1;
  for (int i = 0; i < n; ++i) t.labels.push_back(z.alphabet().name(i));
  return t;
}

bool is_primitive(const IMat& m) {
  const int n = m.rows();
  if (n == 1) return m(0, 0) > 0;
  std::vector<std::vector<bool>> a(n, std::vector<bool>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i][j] = m(i, j) > 0;
  auto mul = [n](const std::vector<std::vector<bool>>& x, const std::vector<std::vector<bool>>& y) {
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        if (x[i][k])
          for (int j = 0; j < n; ++j)
            if (y[k][j]) r[i][j] = true;
    return r;
  };
  long long target = static_cast<long long>(n - 1) * (n - 1) + 1;  // Wielandt bound
  std::vector<std::vector<bool>> acc(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) acc[i][i] = true;
  std::vector<std::vector<bool>> base = a;
  long long e = target;
  while (e > 0) {
    if (e & 1) acc = mul(acc, base);
    base = mul(base, base);
    e >>= 1;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!acc[i][j]) return false;
  return true;
}

BlockStructure block_structure(const Substitution& z) {
  const int n = z.size();
  // Tarjan SCC on the digraph b -> letters of zeta(b).
  std::vector<std::vector<int>> adj(n);
  for (int b = 0; b < n; ++b) {
    std::vector<bool> seen(n, false);
    for (Letter l : z.rule(b)) {
      int a = letter_index(l);
      if (!seen[a]) {
        seen[a] = true;
        adj[b].push_back(a);
      }
    }
  }
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  std::vector<std::vector<int>> sccs;
  int counter = 0;
  std::function<void(int)> strongconnect = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int w : adj[v]) {
      if (index[w] == -1) {
        strongconnect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<int> scc;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = static_cast<int>(sccs.size());
        scc.push_back(w);
      } while (w != v);
      std::sort(scc.begin(), scc.end());
      sccs.push_back(std::move(scc));
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[v] == -1) strongconnect(v);
  // Tarjan emits sinks of the condensation first; sources (B_0) come last.
  std::reverse(sccs.begin(), sccs.end());

  BlockStructure bs;
  bs.blocks = sccs;
  bs.block_of.assign(n, -1);
  for (int i = 0; i < static_cast<int>(sccs.size()); ++i)
    for (int v : sccs[i]) bs.block_of[v] = i;
  TransitionMatrix tm = transition_matrix(z);
  for (const auto& blk : bs.blocks) {
    IMat sub = tm.m.submatrix(blk, blk);
    bs.primitive.push_back(is_primitive(sub));
  }
  return bs;
}

TransitionMatrix block_ordered_matrix(const Substitution& z, const BlockStructure& bs) {
  std::vector<int> order;
  for (const auto& blk : bs.blocks) order.insert(order.end(), blk.begin(), blk.end());
  TransitionMatrix tm = transition_matrix(z);
  TransitionMatrix out;
  out.m = tm.m.submatrix(order, order);
  for (int i : order) out.labels.push_back(tm.labels[i]);
  return out;
}

namespace {

int first_letter_index(const Substitution& z, int letter) {
  return letter_index(z.rule(letter)[0]);
}

// Minimal p >= 1 with the first-letter orbit of `letter` returning to it and
// some orbit rule of length >= 2; 0 when no p works.
int seed_power_for(const Substitution& z, int letter) {
  int x = letter;
  bool expands = false;
  for (int p = 1; p <= z.size() + 1; ++p) {
    if (z.rule(x).size() >= 2) expands = true;
    x = first_letter_index(z, x);
    if (x == letter) return expands ? p : 0;
  }
  return 0;
}

}  // namespace

Seed find_seed(const Substitution& z, const std::vector<int>& block) {
  Seed best;
  for (int a : block) {
    int p = seed_power_for(z, a);
    if (p > 0 && (best.letter < 0 || p < best.power)) {
      best.power = p;
      best.letter = a;
    }
  }
  if (best.letter < 0)
    throw PreconditionError(
        "find_seed: no expanding fixed prefix in the block (all images stay single letters)");
  return best;
}

Word iterate_letter(const Substitution& z, int letter, int n, std::size_t cap) {
  Word w{static_cast<Letter>(letter + 1)};
  for (int i = 0; i < n; ++i) {
    std::size_t next = 0;
    for (Letter l : w) next += z.rule(letter_index(l)).size();
    if (next > cap)
      throw PreconditionError("iterate_letter: cap of " + std::to_string(cap) +
                              " letters exceeded at step " + std::to_string(i + 1));
    w = z.apply(w);
  }
  return w;
}

Word fixed_point_prefix(const Substitution& z, int letter, std::size_t length) {
  const Word& r = z.rule(letter);
  if (letter_index(r[0]) != letter || r.size() < 2)
    throw PreconditionError("fixed_point_prefix: zeta(" + z.alphabet().name(letter) +
                            ") must start with the letter and have length >= 2");
  Word w{static_cast<Letter>(letter + 1)};
  while (w.size() < length) {
    Word next = z.apply(w);
    if (next.size() > length) next.resize(length);
    if (next.size() == w.size())
      throw InternalError("fixed_point_prefix: no growth");  // unreachable given precondition
    w = std::move(next);
  }
  return w;
}

int InducedSubstitution::index_of(const Word& w) const {
  auto it = index_.find(w);
  return it == index_.end() ? -1 : it->second;
}

std::vector<int> InducedSubstitution::crossing_indices() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(words_.size()); ++i)
    if (class_rank_[i] == 0 || class_rank_[i] % 2 == 1) out.push_back(i);
  return out;
}

InducedSubstitution induce(const Substitution& z, int l, int seed_letter, int max_rounds) {
  if (l < 1) throw PreconditionError("induce: l >= 1 required");
  BlockStructure bs = block_structure(z);

  auto class_rank_of = [&](const Word& w) {
    int i = bs.block_of[letter_index(w[0])];
    bool crosses_earlier = false;
    for (Letter x : w)
      if (bs.block_of[letter_index(x)] < i) crosses_earlier = true;
    return crosses_earlier ? 2 * i - 1 : 2 * i;
  };

  std::size_t prefix_len = std::max<std::size_t>(
      static_cast<std::size_t>(10) * l * z.size(), static_cast<std::size_t>(l) + 8);
  Word prefix = fixed_point_prefix(z, seed_letter, prefix_len);

  std::unordered_map<Word, int, WordHash> idx;
  std::vector<Word> words;
  std::deque<Word> queue;
  auto add = [&](const Word& w) {
    if (idx.emplace(w, static_cast<int>(words.size())).second) {
      words.push_back(w);
      queue.push_back(w);
    }
  };
  for (std::size_t p = 0; p + l <= prefix.size(); ++p)
    add(Word(prefix.begin() + p, prefix.begin() + p + l));

  auto image_words = [&](const Word& w) {
    Word zw = z.apply(w);
    std::size_t count = z.rule(letter_index(w[0])).size();
    std::vector<Word> out;
    out.reserve(count);
    for (std::size_t p = 0; p < count; ++p)
      out.emplace_back(zw.begin() + p, zw.begin() + p + l);
    return out;
  };

  int rounds = 0;
  while (!queue.empty()) {
    if (++rounds > max_rounds * static_cast<int>(words.size() + 1))
      throw ConvergenceError("induce: factor discovery did not close within cap " +
                             std::to_string(max_rounds));
    Word w = queue.front();
    queue.pop_front();
    for (const Word& u : image_words(w)) add(u);
  }

  std::sort(words.begin(), words.end(), [&](const Word& a, const Word& b) {
    int ra = class_rank_of(a), rb = class_rank_of(b);
    if (ra != rb) return ra < rb;
    return a < b;
  });

  InducedSubstitution ind;
  ind.l_ = l;
  ind.seed_letter = seed_letter;
  ind.words_ = words;
  ind.index_.clear();
  for (int i = 0; i < static_cast<int>(words.size()); ++i) ind.index_[words[i]] = i;
  for (const Word& w : words) ind.class_rank_.push_back(class_rank_of(w));

  std::vector<std::string> names;
  names.reserve(words.size());
  for (const Word& w : words) names.push_back(z.alphabet().format_word(w));
  std::vector<Word> rules;
  rules.reserve(words.size());
  for (const Word& w : words) {
    Word rule;
    for (const Word& u : image_words(w)) rule.push_back(static_cast<Letter>(ind.index_[u] + 1));
    rules.push_back(std::move(rule));
  }
  ind.sub_ = Substitution(Alphabet(std::move(names), false), std::move(rules));
  return ind;
}

TransitionMatrix restrict_to_crossing(const InducedSubstitution& ind) {
  std::vector<int> keep = ind.crossing_indices();
  TransitionMatrix tm = transition_matrix(ind.sub());
  TransitionMatrix out;
  out.m = tm.m.submatrix(keep, keep);
  for (int i : keep) out.labels.push_back(tm.labels[i]);
  return out;
}

namespace {

struct PreparedSeed {
  Substitution z;     // possibly a power of the input
  int power = 1;
  int scope = -1;     // self-starting letter whose fixed word scopes alphabets
  std::vector<int> block;  // letters of the seed's block in z
  double lambda = 0.0;
};

// The requested seed gives the matrix column; when its own image never begins
// with it, the alphabet is scoped by a self-starting letter of the same block
// (same-first-letter columns share the limit, so the frequencies agree).
PreparedSeed prepare_seed(const Substitution& z0, int seed) {
  if (seed < 0 || seed >= z0.size()) throw PreconditionError("frequencies: seed out of range");
  BlockStructure bs0 = block_structure(z0);
  int p = seed_power_for(z0, seed);
  int scope = seed;
  if (p == 0) {
    Seed s = find_seed(z0, bs0.blocks[bs0.block_of[seed]]);
    p = s.power;
    scope = s.letter;
  }
  PreparedSeed out{p == 1 ? z0 : z0.power(p), p, scope, {}, 0.0};
  BlockStructure bs = block_structure(out.z);
  int blk = bs.block_of[scope];
  if (bs.block_of[seed] != blk)
    throw PreconditionError(
        "frequencies: seed and scoping letter land in different blocks after powering "
        "(imprimitive block)");
  out.block = bs.blocks[blk];
  TransitionMatrix tm = transition_matrix(out.z);
  IMat sub = tm.m.submatrix(out.block, out.block);
  if (!is_primitive(sub))
    throw ConvergenceError("frequencies: seed block is not primitive even after powering");
  out.lambda = pf_eigen(sub).lambda;
  return out;
}

}  // namespace

FrequencyTable frequencies(const Substitution& z0, int seed, const std::vector<Word>& window,
                           const FrequencyOptions& opts) {
  PreparedSeed ps = prepare_seed(z0, seed);
  if (ps.lambda <= 1.0 + 1e-12)
    throw PreconditionError("frequencies: degenerate growth (lambda <= 1)");
  std::vector<bool> in_block(z0.size(), false);
  for (int b : ps.block) in_block[b] = true;
  for (const Word& w : window) {
    if (w.empty()) throw PreconditionError("frequencies: empty window word");
    bool crossing = false;
    for (Letter l : w)
      if (in_block[letter_index(l)]) crossing = true;
    if (!crossing)
      throw PreconditionError("frequencies: window word '" + z0.alphabet().format_word(w) +
                              "' does not cross the seed block");
  }

  FrequencyTable table;
  table.seed = seed;
  table.power_used = ps.power;
  table.lambda = ps.lambda;

  std::vector<int> lengths;
  for (const Word& w : window) lengths.push_back(static_cast<int>(w.size()));
  std::sort(lengths.begin(), lengths.end());
  lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());

  std::map<Word, double> matrix_values;
  if (opts.method != FrequencyMethod::kDirect) {
    for (int l : lengths) {
      InducedSubstitution ind = induce(ps.z, l, ps.scope);
      std::vector<int> keep = ind.crossing_indices();
      TransitionMatrix full = transition_matrix(ind.sub());
      DMat b = to_double(full.m.submatrix(keep, keep));
      int seed_col = -1;
      for (std::size_t j = 0; j < keep.size(); ++j) {
        if (letter_index(ind.alphabet_words()[keep[j]][0]) == seed) {
          seed_col = static_cast<int>(j);
          break;
        }
      }
      if (seed_col < 0) throw InternalError("frequencies: no seed column in the crossing block");
      table.seed_columns[l] = ind.sub().alphabet().name(keep[seed_col]);
      std::vector<double> v(keep.size(), 0.0);
      v[seed_col] = 1.0;
      int settled = 0;
      bool converged = false;
      for (int it = 0; it < opts.max_iter; ++it) {
        std::vector<double> w = b.apply(v);
        for (double& x : w) x /= ps.lambda;
        double change = 0;
        for (std::size_t i = 0; i < v.size(); ++i) change = std::max(change, std::fabs(w[i] - v[i]));
        v = std::move(w);
        if (change < opts.tol / 10) {
          if (++settled >= 3) {
            converged = true;
            break;
          }
        } else {
          settled = 0;
        }
      }
      if (!converged)
        throw ConvergenceError("frequencies: matrix iteration did not settle within " +
                               std::to_string(opts.max_iter) + " iterations (length " +
                               std::to_string(l) + ")");
      for (const Word& w : window) {
        if (static_cast<int>(w.size()) != l) continue;
        int idx = ind.index_of(w);
        if (idx < 0) {
          matrix_values[w] = 0.0;
          continue;
        }
        auto pos = std::find(keep.begin(), keep.end(), idx);
        if (pos == keep.end()) throw InternalError("frequencies: crossing word outside B_l");
        matrix_values[w] = v[static_cast<std::size_t>(pos - keep.begin())];
      }
    }
  }

  std::map<Word, double> direct_values;
  if (opts.method != FrequencyMethod::kMatrix) {
    Word text{static_cast<Letter>(seed + 1)};
    std::vector<double> prev(window.size(), 0.0);
    double scale = 1.0;
    int settled = 0;
    bool converged = false;
    for (int n = 1;; ++n) {
      std::size_t next_len = 0;
      for (Letter l : text) next_len += ps.z.rule(letter_index(l)).size();
      if (next_len > opts.direct_cap) break;
      text = ps.z.apply(text);
      scale *= ps.lambda;
      std::vector<long long> counts = count_batch(text, window);
      double change = 0;
      for (std::size_t i = 0; i < window.size(); ++i) {
        double cur = static_cast<double>(counts[i]) / scale;
        change = std::max(change, std::fabs(cur - prev[i]));
        prev[i] = cur;
      }
      if (n >= 2 && change < opts.direct_tol) {
        if (++settled >= 3) {
          converged = true;
          break;
        }
      } else {
        settled = 0;
      }
    }
    if (!converged && opts.method == FrequencyMethod::kDirect)
      throw ConvergenceError("frequencies: direct method hit the materialization cap before settling");
    for (std::size_t i = 0; i < window.size(); ++i) direct_values[window[i]] = prev[i];
  }

  if (opts.method == FrequencyMethod::kBoth) {
    for (const Word& w : window) {
      double d = std::fabs(matrix_values[w] - direct_values[w]);
      if (d > opts.cross_tol)
        throw ConvergenceError("frequencies: matrix and direct methods disagree by " +
                               std::to_string(d) + " on '" + z0.alphabet().format_word(w) + "'");
    }
  }

  table.values = opts.method == FrequencyMethod::kDirect ? direct_values : matrix_values;

  if (opts.with_kappa) {
    FrequencyOptions sub_opts = opts;
    sub_opts.with_kappa = false;
    sub_opts.method = FrequencyMethod::kMatrix;
    for (int b : ps.block) {
      if (b == seed) {
        table.kappa_map[b] = 1.0;
        continue;
      }
      KappaResult k = kappa(z0, seed, b, window, sub_opts);
      table.kappa_map[b] = k.kappa;
    }
  }
  return table;
}

KappaResult kappa(const Substitution& z, int seed_a, int seed_b, const std::vector<Word>& probe,
                  const FrequencyOptions& opts) {
  FrequencyOptions o = opts;
  o.with_kappa = false;
  FrequencyTable ta = frequencies(z, seed_a, probe, o);
  FrequencyTable tb = frequencies(z, seed_b, probe, o);
  double max_a = 0;
  for (const auto& [w, v] : ta.values) max_a = std::max(max_a, std::fabs(v));
  std::vector<double> ratios;
  for (const Word& w : probe) {
    double da = ta.values.at(w);
    if (std::fabs(da) > 1e-9 * max_a && std::fabs(da) > 0) ratios.push_back(tb.values.at(w) / da);
  }
  if (ratios.empty())
    throw PreconditionError("kappa: zero denominators on the entire probe window");
  std::sort(ratios.begin(), ratios.end());
  KappaResult out;
  out.kappa = ratios[ratios.size() / 2];
  out.window_used = static_cast<int>(ratios.size());
  for (double r : ratios)
    out.max_deviation = std::max(out.max_deviation, std::fabs(r - out.kappa) / std::fabs(out.kappa));
  return out;
}

KirchhoffReport check_kirchhoff(const FrequencyTable& table, const Substitution& z, double tol) {
  KirchhoffReport rep;
  for (const auto& [w, value] : table.values) {
    bool all_fwd = true, any_fwd = false, all_bwd = true, any_bwd = false;
    double fwd = 0, bwd = 0;
    for (int e = 0; e < z.size(); ++e) {
      Word we = w;
      we.push_back(static_cast<Letter>(e + 1));
      Word ew;
      ew.push_back(static_cast<Letter>(e + 1));
      ew.insert(ew.end(), w.begin(), w.end());
      auto itf = table.values.find(we);
      if (itf == table.values.end()) {
        all_fwd = false;
      } else {
        any_fwd = true;
        fwd += itf->second;
      }
      auto itb = table.values.find(ew);
      if (itb == table.values.end()) {
        all_bwd = false;
      } else {
        any_bwd = true;
        bwd += itb->second;
      }
    }
    if ((any_fwd && !all_fwd) || (any_bwd && !all_bwd)) {
      for (int e = 0; e < z.size(); ++e) {
        Word we = w;
        we.push_back(static_cast<Letter>(e + 1));
        if (any_fwd && !table.values.count(we)) rep.missing.push_back(we);
      }
      continue;
    }
    if (!all_fwd || !all_bwd) continue;  // outermost shell, nothing to check
    KirchhoffReport::Row row;
    row.word = w;
    row.forward_residual = value - fwd;
    row.backward_residual = value - bwd;
    rep.rows.push_back(row);
    rep.max_residual = std::max({rep.max_residual, std::fabs(row.forward_residual),
                                 std::fabs(row.backward_residual)});
  }
  if (!rep.missing.empty()) {
    std::string msg = "check_kirchhoff: incomplete window, missing";
    for (const Word& w : rep.missing) msg += " '" + z.alphabet().format_word(w) + "'";
    throw PreconditionError(msg);
  }
  rep.pass = rep.max_residual < tol;
  return rep;
}

std::vector<Word> occurring_crossing_words(const Substitution& z, int seed, int max_len) {
  PreparedSeed ps = prepare_seed(z, seed);
  std::vector<Word> out;
  for (int l = 1; l <= max_len; ++l) {
    InducedSubstitution ind = induce(ps.z, l, ps.scope);
    for (int i : ind.crossing_indices()) out.push_back(ind.alphabet_words()[i]);
  }
  return out;
}

std::vector<std::complex<double>> spectrum(const TransitionMatrix& m) {
  return spectrum(to_double(m.m));
}

SpectrumReport compare_spectra(const TransitionMatrix& m, const TransitionMatrix& ml, double tol) {
  return compare_spectra(to_double(m.m), to_double(ml.m), tol);
}

}  // namespace relcur
