#include "relcur/traintrack.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "relcur/eigen.hpp"
#include "relcur/errors.hpp"

namespace relcur {

MarkedGraph MarkedGraph::rose(const std::vector<std::string>& names) {
  MarkedGraph g;
  g.n_vertices = 1;
  for (const auto& n : names) g.edges.push_back({n, 0, 0});
  return g;
}

Alphabet MarkedGraph::edge_alphabet() const {
  std::vector<std::string> names;
  for (const auto& e : edges) names.push_back(e.name);
  return Alphabet(names, true);
}

bool MarkedGraph::is_path(const Word& w) const {
  for (std::size_t i = 1; i < w.size(); ++i)
    if (dir_to(w[i - 1]) != dir_from(w[i])) return false;
  return true;
}

std::vector<int> MarkedGraph::valences() const {
  std::vector<int> v(n_vertices, 0);
  for (const auto& e : edges) {
    v[e.from] += 1;
    v[e.to] += 1;
  }
  return v;
}

Word tighten(const Word& path) { return reduce(path); }

TrainTrackSystem::TrainTrackSystem(MarkedGraph graph, std::vector<Word> edge_map,
                                   std::vector<std::vector<int>> strata, TTAnnotations ann)
    : graph_(std::move(graph)),
      alphabet_(graph_.edge_alphabet()),
      edge_map_(std::move(edge_map)),
      strata_(std::move(strata)),
      ann_(std::move(ann)) {
  if (static_cast<int>(edge_map_.size()) != graph_.num_edges())
    throw PreconditionError("train track: one image per edge required");
  if (strata_.empty()) derive_strata();
  stratum_of_.assign(graph_.num_edges(), -1);
  for (int i = 0; i < num_strata(); ++i)
    for (int e : strata_[i]) {
      if (e < 0 || e >= graph_.num_edges() || stratum_of_[e] != -1)
        throw PreconditionError("train track: strata must partition the edges");
      stratum_of_[e] = i;
    }
  for (int e = 0; e < graph_.num_edges(); ++e)
    if (stratum_of_[e] == -1) throw PreconditionError("train track: strata must cover the edges");
  validate();
  compute_metric();
}

Word TrainTrackSystem::image_of_direction(Letter d) const {
  const Word& img = edge_map_[letter_index(d)];
  return d > 0 ? img : invert(img);
}

Word TrainTrackSystem::image_of_path(const Word& path) const {
  Word out;
  for (Letter d : path) {
    Word img = image_of_direction(d);
    out.insert(out.end(), img.begin(), img.end());
  }
  return out;
}

bool TrainTrackSystem::crosses_top(const Word& path) const {
  for (Letter d : path)
    if (edge_in_top(letter_index(d))) return true;
  return false;
}

IMat TrainTrackSystem::stratum_block(int i) const {
  const auto& s = strata_[i];
  IMat m(static_cast<int>(s.size()), static_cast<int>(s.size()));
  for (std::size_t j = 0; j < s.size(); ++j) {
    for (Letter d : edge_map_[s[j]]) {
      int e = letter_index(d);
      auto it = std::find(s.begin(), s.end(), e);
      if (it != s.end()) m(static_cast<int>(it - s.begin()), static_cast<int>(j)) += 1;
    }
  }
  return m;
}

bool TrainTrackSystem::stratum_zero(int i) const {
  IMat m = stratum_block(i);
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      if (m(r, c) != 0) return false;
  return true;
}

bool TrainTrackSystem::stratum_irreducible(int i) const {
  IMat m = stratum_block(i);
  const int n = m.rows();
  // strongly connected reachability
  for (int s = 0; s < n; ++s) {
    std::vector<bool> seen(n, false);
    std::deque<int> queue{s};
    seen[s] = true;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int w = 0; w < n; ++w)
        if (!seen[w] && m(w, v) > 0) {
          seen[w] = true;
          queue.push_back(w);
        }
    }
    for (int w = 0; w < n; ++w)
      if (!seen[w]) return false;
  }
  return true;
}

double TrainTrackSystem::metric(int edge) const { return metric_[edge]; }

double TrainTrackSystem::lambda() const {
  if (lambda_ <= 1.0)
    throw PreconditionError("train track: top stratum is not exponentially growing");
  return lambda_;
}

void TrainTrackSystem::derive_strata() {
  const int n = graph_.num_edges();
  std::vector<std::vector<int>> adj(n);
  for (int e = 0; e < n; ++e) {
    std::set<int> seen;
    for (Letter d : edge_map_[e]) seen.insert(letter_index(d));
    adj[e].assign(seen.begin(), seen.end());
  }
  std::vector<int> index(n, -1), low(n, 0);
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
        scc.push_back(w);
      } while (w != v);
      std::sort(scc.begin(), scc.end());
      sccs.push_back(std::move(scc));
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[v] == -1) strongconnect(v);
  // Tarjan emits sinks first, which is exactly bottom-up.
  strata_ = std::move(sccs);
}

void TrainTrackSystem::validate() {
  const int n = graph_.num_edges();
  // vertex images must be consistent across the edge map
  std::vector<int> vertex_image(graph_.n_vertices, -1);
  auto constrain = [&](int v, int image, const std::string& where) {
    if (image < 0 || image >= graph_.n_vertices)
      throw PreconditionError("train track: bad vertex in " + where);
    if (vertex_image[v] == -1)
      vertex_image[v] = image;
    else if (vertex_image[v] != image)
      throw PreconditionError("train track: inconsistent vertex map at " + where);
  };
  for (int e = 0; e < n; ++e) {
    const Word& img = edge_map_[e];
    if (img.empty())
      throw PreconditionError("train track: empty image of edge " + alphabet_.name(e));
    for (Letter d : img)
      if (letter_index(d) >= n) throw PreconditionError("train track: undeclared edge in image");
    if (!graph_.is_path(img))
      throw PreconditionError("train track: image of " + alphabet_.name(e) + " is not a path");
    if (!is_reduced(img))
      throw PreconditionError("train track: image of " + alphabet_.name(e) +
                              " backtracks (not an immersion)");
    constrain(graph_.edges[e].from, graph_.dir_from(img.front()), alphabet_.name(e));
    constrain(graph_.edges[e].to, graph_.dir_to(img.back()), alphabet_.name(e));
  }
  for (int v : graph_.valences())
    if (v < 2) warnings_.push_back("vertex of valence < 2");
  // stratum invariance: images stay in the same or lower strata
  for (int e = 0; e < n; ++e)
    for (Letter d : edge_map_[e])
      if (stratum_of_[letter_index(d)] > stratum_of_[e])
        throw PreconditionError("train track: image of " + alphabet_.name(e) +
                                " climbs above its stratum");
  // annotations
  for (const auto& inp : ann_.inps) {
    if (!graph_.is_path(inp.path) || !is_reduced(inp.path))
      throw PreconditionError("train track: INP " + inp.name + " is not a reduced path");
    if (tighten(image_of_path(inp.path)) != inp.path)
      throw PreconditionError("train track: [phi(" + inp.name + ")] != " + inp.name);
  }
  auto inp_path = [&](const std::string& name) -> const Word& {
    for (const auto& inp : ann_.inps)
      if (inp.name == name) return inp.path;
    throw PreconditionError("train track: unknown INP '" + name + "'");
  };
  for (const auto& lin : ann_.linear_edges) {
    const Word& axis = inp_path(lin.axis);
    Word expect{static_cast<Letter>(lin.edge + 1)};
    for (int i = 0; i < lin.exponent; ++i) expect.insert(expect.end(), axis.begin(), axis.end());
    if (lin.exponent <= 0 || edge_map_[lin.edge] != expect)
      throw PreconditionError("train track: linear annotation of " + alphabet_.name(lin.edge) +
                              " does not match the edge map");
  }
  auto linear_exponent = [&](int edge) {
    for (const auto& lin : ann_.linear_edges)
      if (lin.edge == edge) return lin.exponent;
    return -1;
  };
  for (const auto& ex : ann_.exceptionals) {
    int d1 = linear_exponent(ex.e1);
    int d2 = linear_exponent(ex.e2);
    if (d1 < 0 || d2 < 0)
      throw PreconditionError("train track: exceptional family " + ex.name +
                              " references non-linear edges");
    if (d1 <= d2)
      throw PreconditionError("train track: exceptional family " + ex.name +
                              " needs d1 > d2 (swap the edges)");
    const Word& axis = inp_path(ex.axis);
    // phi(e1 axis e2bar) must tighten to e1 axis^(1+delta) e2bar
    Word x1{static_cast<Letter>(ex.e1 + 1)};
    x1.insert(x1.end(), axis.begin(), axis.end());
    x1.push_back(static_cast<Letter>(-(ex.e2 + 1)));
    Word expect{static_cast<Letter>(ex.e1 + 1)};
    for (int i = 0; i < 1 + d1 - d2; ++i) expect.insert(expect.end(), axis.begin(), axis.end());
    expect.push_back(static_cast<Letter>(-(ex.e2 + 1)));
    if (!graph_.is_path(x1) || tighten(image_of_path(x1)) != expect)
      throw PreconditionError("train track: exceptional family " + ex.name +
                              " does not shift widths by delta");
  }
  for (const auto& conn : ann_.connectings) {
    if (!graph_.is_path(conn.path) || !is_reduced(conn.path))
      throw PreconditionError("train track: connecting path " + conn.name + " is not reduced");
  }
}

void TrainTrackSystem::compute_metric() {
  metric_.assign(graph_.num_edges(), 1.0);
  int top = top_stratum();
  IMat block = stratum_block(top);
  if (!stratum_irreducible(top) || stratum_zero(top)) {
    warnings_.push_back("top stratum block is not irreducible; metric left at one");
    return;
  }
  try {
    PfData pf = pf_eigen(block);
    lambda_ = pf.lambda;
    for (std::size_t j = 0; j < strata_[top].size(); ++j) metric_[strata_[top][j]] = pf.right[j];
  } catch (const ConvergenceError&) {
    warnings_.push_back("top stratum PF data did not converge; metric left at one");
  }
}

Letter direction_map(const TrainTrackSystem& tt, Letter d) {
  return tt.image_of_direction(d)[0];
}

TurnClassification::Key TurnClassification::key(Letter a, Letter b) {
  if (letter_rank(a) > letter_rank(b)) std::swap(a, b);
  return {a, b};
}

const TurnInfo& TurnClassification::info(Letter a, Letter b) const {
  auto it = table_.find(key(a, b));
  if (it == table_.end()) throw PreconditionError("turn classification: unknown turn");
  return it->second;
}

TurnClassification classify_turns(const TrainTrackSystem& tt) {
  TurnClassification out;
  std::vector<Letter> dirs;
  for (int e = 0; e < tt.graph().num_edges(); ++e) {
    dirs.push_back(static_cast<Letter>(e + 1));
    dirs.push_back(static_cast<Letter>(-(e + 1)));
  }
  std::vector<TurnClassification::Key> all;
  for (std::size_t i = 0; i < dirs.size(); ++i)
    for (std::size_t j = i; j < dirs.size(); ++j)
      if (tt.graph().dir_from(dirs[i]) == tt.graph().dir_from(dirs[j]))
        all.push_back(TurnClassification::key(dirs[i], dirs[j]));
  for (const auto& start : all) {
    if (out.table_.count(start)) continue;
    std::vector<TurnClassification::Key> orbit;
    std::set<TurnClassification::Key> on_orbit;
    TurnClassification::Key cur = start;
    for (;;) {
      if (cur.first == cur.second) {
        // resolved: degenerate endpoint, everything on the way is illegal
        TurnInfo deg{true, true, 0};
        if (!out.table_.count(cur)) out.table_[cur] = deg;
        for (std::size_t i = 0; i < orbit.size(); ++i)
          out.table_[orbit[i]] = {false, true, static_cast<int>(orbit.size() - i)};
        break;
      }
      auto known = out.table_.find(cur);
      if (known != out.table_.end()) {
        for (std::size_t i = 0; i < orbit.size(); ++i)
          out.table_[orbit[i]] = {false, known->second.illegal,
                                  known->second.steps + static_cast<int>(orbit.size() - i)};
        break;
      }
      if (on_orbit.count(cur)) {
        // periodic orbit of non-degenerate turns: legal
        for (std::size_t i = 0; i < orbit.size(); ++i) out.table_[orbit[i]] = {false, false, 0};
        break;
      }
      orbit.push_back(cur);
      on_orbit.insert(cur);
      cur = TurnClassification::key(direction_map(tt, cur.first), direction_map(tt, cur.second));
    }
  }
  return out;
}

long long illegal_turn_count(const TrainTrackSystem& tt, const TurnClassification& turns,
                             const Word& path, bool cyclic) {
  long long count = 0;
  const std::size_t n = path.size();
  if (n < 2 && !cyclic) return 0;
  std::size_t limit = cyclic ? n : n - 1;
  for (std::size_t i = 0; i < limit; ++i) {
    Letter a = inverse(path[i]);
    Letter b = path[(i + 1) % n];
    bool has_top = tt.edge_in_top(letter_index(a)) || tt.edge_in_top(letter_index(b));
    if (has_top && turns.is_illegal(a, b)) ++count;
  }
  return count;
}

RttReport verify_relative_train_track(const TrainTrackSystem& tt, int legal_samples,
                                      unsigned rng_seed) {
  RttReport rep;
  auto add = [&](const std::string& check, bool pass, const std::string& detail = "") {
    rep.items.push_back({check, pass, detail});
    rep.pass = rep.pass && pass;
  };
  TurnClassification turns = classify_turns(tt);

  for (int s = 0; s < tt.num_strata(); ++s) {
    if (tt.stratum_zero(s)) continue;
    bool irr = tt.stratum_irreducible(s);
    add("stratum " + std::to_string(s) + " irreducible", irr);
  }

  for (int s = 0; s < tt.num_strata(); ++s) {
    if (tt.stratum_zero(s) || !tt.stratum_irreducible(s)) continue;
    IMat block = tt.stratum_block(s);
    bool eg = false;
    try {
      eg = is_primitive(block) && pf_eigen(block).lambda > 1.0 + 1e-12;
    } catch (const Error&) {
      eg = false;
    }
    if (!eg) continue;
    bool ok = true;
    std::string bad;
    for (int e : tt.stratum(s)) {
      const Word& img = tt.image(e);
      if (tt.stratum_of(letter_index(img.front())) != s ||
          tt.stratum_of(letter_index(img.back())) != s) {
        ok = false;
        bad = tt.edge_alphabet().name(e);
      }
    }
    add("EG stratum " + std::to_string(s) + " first/last edge condition", ok, bad);

    // sampled r-legal paths stay r-legal
    std::mt19937 rng(rng_seed + s);
    bool legal_ok = true;
    for (int trial = 0; trial < legal_samples; ++trial) {
      // random legal path within G_s
      std::vector<Letter> dirs;
      for (int e = 0; e < tt.graph().num_edges(); ++e) {
        if (tt.stratum_of(e) > s) continue;
        dirs.push_back(static_cast<Letter>(e + 1));
        dirs.push_back(static_cast<Letter>(-(e + 1)));
      }
      std::uniform_int_distribution<std::size_t> pick(0, dirs.size() - 1);
      Word path{dirs[pick(rng)]};
      for (int len = 1; len < 6; ++len) {
        std::vector<Letter> options;
        for (Letter d : dirs) {
          if (tt.graph().dir_from(d) != tt.graph().dir_to(path.back())) continue;
          if (d == inverse(path.back())) continue;
          Letter a = inverse(path.back());
          bool top_turn = tt.stratum_of(letter_index(a)) == s || tt.stratum_of(letter_index(d)) == s;
          if (top_turn && turns.is_illegal(a, d)) continue;
          options.push_back(d);
        }
        if (options.empty()) break;
        std::uniform_int_distribution<std::size_t> opt(0, options.size() - 1);
        path.push_back(options[opt(rng)]);
      }
      Word img = tighten(tt.image_of_path(path));
      // count illegal turns of the image at this stratum level
      for (std::size_t i = 0; i + 1 < img.size(); ++i) {
        Letter a = inverse(img[i]);
        Letter b = img[i + 1];
        bool top_turn = tt.stratum_of(letter_index(a)) == s || tt.stratum_of(letter_index(b)) == s;
        if (top_turn && turns.is_illegal(a, b)) legal_ok = false;
      }
    }
    add("EG stratum " + std::to_string(s) + " legal images of legal paths", legal_ok);
  }
  return rep;
}

bool verify_nielsen(const TrainTrackSystem& tt, const Word& sigma) {
  if (!tt.graph().is_path(sigma)) throw PreconditionError("verify_nielsen: not a path");
  return tighten(tt.image_of_path(sigma)) == sigma;
}

namespace {

std::vector<Word> reduced_paths_up_to(const TrainTrackSystem& tt, int depth) {
  std::vector<Word> out, frontier;
  for (int e = 0; e < tt.graph().num_edges(); ++e) {
    frontier.push_back({static_cast<Letter>(e + 1)});
    frontier.push_back({static_cast<Letter>(-(e + 1))});
  }
  out = frontier;
  for (int l = 1; l < depth; ++l) {
    std::vector<Word> next;
    for (const Word& w : frontier) {
      for (int e = 0; e < tt.graph().num_edges(); ++e) {
        for (Letter d : {static_cast<Letter>(e + 1), static_cast<Letter>(-(e + 1))}) {
          if (d == inverse(w.back())) continue;
          if (tt.graph().dir_from(d) != tt.graph().dir_to(w.back())) continue;
          Word v = w;
          v.push_back(d);
          next.push_back(std::move(v));
        }
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

}  // namespace

double bcc_estimate(const TrainTrackSystem& tt, int probe_depth) {
  std::vector<Word> paths = reduced_paths_up_to(tt, probe_depth);
  double best = 0.0;
  for (int power = 1; power <= 2; ++power) {
    auto tightened_image = [&](const Word& w) {
      Word x = w;
      for (int i = 0; i < power; ++i) x = tighten(tt.image_of_path(x));
      return x;
    };
    for (const Word& a : paths) {
      for (const Word& b : paths) {
        if (tt.graph().dir_to(a.back()) != tt.graph().dir_from(b.front())) continue;
        if (b.front() == inverse(a.back())) continue;  // concatenation must stay reduced
        Word ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        double la = r_length(tt, tightened_image(a));
        double lb = r_length(tt, tightened_image(b));
        double lab = r_length(tt, tightened_image(ab));
        best = std::max(best, (la + lb - lab) / 2.0);
      }
    }
  }
  return best;
}

double r_length(const TrainTrackSystem& tt, const Word& path) {
  double s = 0;
  for (Letter d : path) s += tt.metric(letter_index(d));
  return s;
}

double critical_length(const TrainTrackSystem& tt, double bcc) {
  return 2.0 * bcc / (tt.lambda() - 1.0);
}

namespace {

// longest run of `pattern` repeated from position i
long long run_length(const Word& w, std::size_t i, const Word& pattern) {
  long long runs = 0;
  while (i + pattern.size() <= w.size() &&
         std::equal(pattern.begin(), pattern.end(), w.begin() + i)) {
    ++runs;
    i += pattern.size();
  }
  return runs;
}

}  // namespace

std::vector<SplitUnit> split_into_units(const TrainTrackSystem& tt, const Word& path,
                                        const TurnClassification* turns) {
  const auto& ann = tt.annotations();
  auto inp_path = [&](const std::string& name) -> const Word& {
    for (const auto& inp : ann.inps)
      if (inp.name == name) return inp.path;
    throw InternalError("split: unknown INP axis");
  };
  std::vector<SplitUnit> units;
  std::size_t i = 0;
  while (i < path.size()) {
    SplitUnit unit;
    std::size_t len = 0;
    // exceptional families, widest match first
    for (int f = 0; f < static_cast<int>(ann.exceptionals.size()); ++f) {
      const auto& ex = ann.exceptionals[f];
      const Word& axis = inp_path(ex.axis);
      for (bool inverted : {false, true}) {
        Letter head = static_cast<Letter>((inverted ? ex.e2 : ex.e1) + 1);
        Letter tail = static_cast<Letter>(-((inverted ? ex.e1 : ex.e2) + 1));
        if (path[i] != head) continue;
        Word ax = inverted ? invert(axis) : axis;
        long long m = run_length(path, i + 1, ax);
        for (; m >= 1; --m) {
          std::size_t end = i + 1 + m * ax.size();
          if (end < path.size() && path[end] == tail) {
            std::size_t total = end + 1 - i;
            if (total > len) {
              len = total;
              unit = SplitUnit{SplitUnit::Kind::kExceptional, 0, f, inverted, m};
            }
            break;
          }
        }
      }
    }
    if (len == 0) {
      for (int j = 0; j < static_cast<int>(ann.inps.size()); ++j) {
        for (bool inverted : {false, true}) {
          Word p = inverted ? invert(ann.inps[j].path) : ann.inps[j].path;
          if (p.size() > len && i + p.size() <= path.size() &&
              std::equal(p.begin(), p.end(), path.begin() + i)) {
            len = p.size();
            unit = SplitUnit{SplitUnit::Kind::kInp, 0, j, inverted, 0};
          }
        }
      }
      for (int j = 0; j < static_cast<int>(ann.connectings.size()); ++j) {
        for (bool inverted : {false, true}) {
          Word p = inverted ? invert(ann.connectings[j].path) : ann.connectings[j].path;
          if (p.size() > len && i + p.size() <= path.size() &&
              std::equal(p.begin(), p.end(), path.begin() + i)) {
            len = p.size();
            unit = SplitUnit{SplitUnit::Kind::kConnecting, 0, j, inverted, 0};
          }
        }
      }
    }
    if (len == 0) {
      unit = SplitUnit{SplitUnit::Kind::kEdge, path[i], -1, false, 0};
      len = 1;
    }
    if (turns && !units.empty()) {
      Letter prev_last = path[i - 1];
      Letter next_first = path[i];
      if (turns->is_illegal(inverse(prev_last), next_first)) {
        std::ostringstream msg;
        msg << "incomplete CT: illegal turn between splitting units inside '"
            << tt.edge_alphabet().format_word(path) << "' at position " << i
            << " (missing annotation?)";
        throw PreconditionError(msg.str());
      }
    }
    units.push_back(unit);
    i += len;
  }
  return units;
}

long long max_relevant_width(const TrainTrackSystem& tt, const Word& gamma) {
  const auto& ann = tt.annotations();
  long long n = 0;
  auto inp_path = [&](const std::string& name) -> const Word& {
    for (const auto& inp : ann.inps)
      if (inp.name == name) return inp.path;
    throw InternalError("max_relevant_width: unknown INP axis");
  };
  // widths of exceptional units in the edge and connecting images
  auto scan_units = [&](const Word& p) {
    for (const auto& u : split_into_units(tt, p))
      if (u.kind == SplitUnit::Kind::kExceptional) n = std::max(n, u.width);
  };
  for (int e = 0; e < tt.graph().num_edges(); ++e) scan_units(tt.image(e));
  for (const auto& conn : ann.connectings) scan_units(tighten(tt.image_of_path(conn.path)));
  // axis runs inside gamma itself
  for (const auto& ex : ann.exceptionals) {
    const Word& axis = inp_path(ex.axis);
    for (const Word& ax : {axis, invert(axis)})
      for (std::size_t i = 0; i < gamma.size(); ++i) n = std::max(n, run_length(gamma, i, ax));
  }
  return n;
}

TrainTrackSubstitution::TrainTrackSubstitution(const TrainTrackSystem& tt, Letter seed_direction,
                                               long long max_width, int cap_pad)
    : tt_(&tt), seed_dir_(seed_direction), cap_pad_(cap_pad), width_cap_(max_width + cap_pad) {
  if (cap_pad_ < 1) throw PreconditionError("adapter: cap_pad >= 1 required");
  Word seed_img = tt.image_of_direction(seed_dir_);
  if (seed_img[0] != seed_dir_)
    throw PreconditionError("adapter: phi(seed) must begin with the seed direction");
  if (seed_img.size() < 2) throw PreconditionError("adapter: phi(seed) must expand");
  if (!tt.edge_in_top(letter_index(seed_dir_)))
    throw PreconditionError("adapter: seed must lie in the top stratum");
  turns_ = classify_turns(tt);
  discover_alphabet();
  build_rules();
}

namespace {

std::string unit_name(const TrainTrackSystem& tt, const SplitUnit& u) {
  const auto& ann = tt.annotations();
  switch (u.kind) {
    case SplitUnit::Kind::kEdge:
      return tt.edge_alphabet().format_letter(u.edge);
    case SplitUnit::Kind::kInp:
      return (u.inverted ? "~" : "") + ann.inps[u.index].name;
    case SplitUnit::Kind::kConnecting:
      return (u.inverted ? "~" : "") + ann.connectings[u.index].name;
    case SplitUnit::Kind::kExceptional:
      return (u.inverted ? "~" : "") + ann.exceptionals[u.index].name + std::to_string(u.width);
  }
  return "?";
}

}  // namespace

void TrainTrackSubstitution::discover_alphabet() {
  const TrainTrackSystem& tt = *tt_;
  auto cap = [&](SplitUnit u) {
    if (u.kind == SplitUnit::Kind::kExceptional) u.width = std::min(u.width, width_cap_);
    return u;
  };
  auto image_units = [&](const SplitUnit& u) {
    std::vector<SplitUnit> out;
    switch (u.kind) {
      case SplitUnit::Kind::kEdge:
        for (auto& v : split_into_units(tt, tt.image_of_direction(u.edge), &turns_))
          out.push_back(cap(v));
        break;
      case SplitUnit::Kind::kInp:
        out.push_back(u);
        break;
      case SplitUnit::Kind::kConnecting: {
        Word p = tt.annotations().connectings[u.index].path;
        if (u.inverted) p = invert(p);
        for (auto& v : split_into_units(tt, tighten(tt.image_of_path(p)), &turns_))
          out.push_back(cap(v));
        break;
      }
      case SplitUnit::Kind::kExceptional: {
        const auto& ex = tt.annotations().exceptionals[u.index];
        int d1 = 0, d2 = 0;
        for (const auto& lin : tt.annotations().linear_edges) {
          if (lin.edge == ex.e1) d1 = lin.exponent;
          if (lin.edge == ex.e2) d2 = lin.exponent;
        }
        SplitUnit v = u;
        if (v.width < width_cap_) v.width = std::min<long long>(v.width + (d1 - d2), width_cap_);
        out.push_back(v);
        break;
      }
    }
    return out;
  };

  std::map<std::string, SplitUnit> reached;
  std::deque<SplitUnit> queue;
  SplitUnit seed{SplitUnit::Kind::kEdge, seed_dir_, -1, false, 0};
  reached[unit_name(tt, seed)] = seed;
  queue.push_back(seed);
  while (!queue.empty()) {
    SplitUnit u = queue.front();
    queue.pop_front();
    for (const auto& v : image_units(u)) {
      std::string name = unit_name(tt, v);
      if (!reached.count(name)) {
        reached[name] = v;
        queue.push_back(v);
      }
    }
  }

  // canonical order: strata top-down with positive directions first, then
  // INPs, connecting paths and exceptional families by annotation order
  std::vector<SplitUnit> all;
  for (auto& [name, u] : reached) all.push_back(u);
  auto order_key = [&](const SplitUnit& u) {
    switch (u.kind) {
      case SplitUnit::Kind::kEdge:
        return std::tuple(0, tt.top_stratum() - tt.stratum_of(letter_index(u.edge)),
                          u.edge < 0 ? 1 : 0, static_cast<long long>(letter_index(u.edge)));
      case SplitUnit::Kind::kInp:
        return std::tuple(1, u.index, u.inverted ? 1 : 0, 0ll);
      case SplitUnit::Kind::kConnecting:
        return std::tuple(2, u.index, u.inverted ? 1 : 0, 0ll);
      case SplitUnit::Kind::kExceptional:
        return std::tuple(3, u.index, u.inverted ? 1 : 0, u.width);
    }
    return std::tuple(4, 0, 0, 0ll);
  };
  std::sort(all.begin(), all.end(),
            [&](const SplitUnit& a, const SplitUnit& b) { return order_key(a) < order_key(b); });
  units_ = std::move(all);
  for (int i = 0; i < static_cast<int>(units_.size()); ++i)
    letter_of_[unit_name(tt, units_[i])] = i;
  seed_letter_ = letter_of_.at(unit_name(tt, seed));
}

void TrainTrackSubstitution::build_rules() {
  const TrainTrackSystem& tt = *tt_;
  auto cap = [&](SplitUnit u) {
    if (u.kind == SplitUnit::Kind::kExceptional) u.width = std::min(u.width, width_cap_);
    return u;
  };
  std::vector<std::string> names;
  for (const auto& u : units_) names.push_back(unit_name(tt, u));
  std::vector<Word> rules;
  for (const auto& u : units_) {
    std::vector<SplitUnit> img;
    switch (u.kind) {
      case SplitUnit::Kind::kEdge:
        for (auto& v : split_into_units(tt, tt.image_of_direction(u.edge), &turns_))
          img.push_back(cap(v));
        break;
      case SplitUnit::Kind::kInp:
        img.push_back(u);
        break;
      case SplitUnit::Kind::kConnecting: {
        Word p = tt.annotations().connectings[u.index].path;
        if (u.inverted) p = invert(p);
        for (auto& v : split_into_units(tt, tighten(tt.image_of_path(p)), &turns_))
          img.push_back(cap(v));
        break;
      }
      case SplitUnit::Kind::kExceptional: {
        const auto& ex = tt.annotations().exceptionals[u.index];
        int d1 = 0, d2 = 0;
        for (const auto& lin : tt.annotations().linear_edges) {
          if (lin.edge == ex.e1) d1 = lin.exponent;
          if (lin.edge == ex.e2) d2 = lin.exponent;
        }
        SplitUnit v = u;
        if (v.width < width_cap_) v.width = std::min<long long>(v.width + (d1 - d2), width_cap_);
        img.push_back(v);
        break;
      }
    }
    Word rule;
    for (const auto& v : img) rule.push_back(static_cast<Letter>(letter_of_.at(unit_name(tt, v)) + 1));
    rules.push_back(std::move(rule));
  }
  zeta_ = Substitution(Alphabet(names, false), std::move(rules));

  BlockStructure bs = block_structure(zeta_);
  int blk = bs.block_of[seed_letter_];
  TransitionMatrix tm = transition_matrix(zeta_);
  IMat sub = tm.m.submatrix(bs.blocks[blk], bs.blocks[blk]);
  lambda_ = pf_eigen(sub).lambda;
  if (lambda_ <= 1.0 + 1e-12)
    throw PreconditionError("adapter: top block of the induced substitution does not expand");
}

int TrainTrackSubstitution::unit_letter(const SplitUnit& u) const {
  auto it = letter_of_.find(unit_name(*tt_, u));
  return it == letter_of_.end() ? -1 : it->second;
}

Word TrainTrackSubstitution::realize_letter(int letter) const {
  const SplitUnit& u = units_[letter];
  const auto& ann = tt_->annotations();
  switch (u.kind) {
    case SplitUnit::Kind::kEdge:
      return {u.edge};
    case SplitUnit::Kind::kInp: {
      Word p = ann.inps[u.index].path;
      return u.inverted ? invert(p) : p;
    }
    case SplitUnit::Kind::kConnecting: {
      Word p = ann.connectings[u.index].path;
      return u.inverted ? invert(p) : p;
    }
    case SplitUnit::Kind::kExceptional: {
      const auto& ex = ann.exceptionals[u.index];
      Word axis;
      for (const auto& inp : ann.inps)
        if (inp.name == ex.axis) axis = inp.path;
      // the absorbing letter stands for every larger width; realize it well
      // past any bounded overlap
      long long width = u.width < width_cap_ ? u.width : width_cap_ + 8;
      Word p{static_cast<Letter>(ex.e1 + 1)};
      for (long long i = 0; i < width; ++i) p.insert(p.end(), axis.begin(), axis.end());
      p.push_back(static_cast<Letter>(-(ex.e2 + 1)));
      return u.inverted ? invert(p) : p;
    }
  }
  return {};
}

std::vector<std::pair<Word, long long>> TrainTrackSubstitution::r_tilde(const Word& gamma) const {
  const TrainTrackSystem& tt = *tt_;
  if (!tt.graph().is_path(gamma) || !is_reduced(gamma))
    throw PreconditionError("r_tilde: gamma must be a reduced path");
  if (!tt.crosses_top(gamma))
    throw PreconditionError("r_tilde: gamma must cross the top stratum");
  if (max_relevant_width(tt, gamma) >= width_cap_)
    throw PreconditionError("r_tilde: gamma interacts with widths beyond the cap; rebuild with a larger cap");

  bool edges_only = true;
  for (const auto& u : units_) edges_only = edges_only && u.kind == SplitUnit::Kind::kEdge;
  std::vector<std::pair<Word, long long>> out;
  if (edges_only) {
    Word w;
    for (Letter d : gamma) {
      int l = unit_letter(SplitUnit{SplitUnit::Kind::kEdge, d, -1, false, 0});
      if (l < 0) return out;  // gamma never occurs in rho_seed
      w.push_back(static_cast<Letter>(l + 1));
    }
    out.emplace_back(std::move(w), 1);
    return out;
  }

  int lmax = static_cast<int>(gamma.size()) + 2;
  for (int l = 1; l <= lmax; ++l) {
    InducedSubstitution ind = induce(zeta_, l, seed_letter_);
    for (const Word& w : ind.alphabet_words()) {
      // realize and count的 alignments anchored in the first and last units
      std::vector<Word> parts;
      std::size_t total = 0;
      for (Letter x : w) {
        parts.push_back(realize_letter(letter_index(x)));
        total += parts.back().size();
      }
      if (total < gamma.size()) continue;
      Word realization;
      realization.reserve(total);
      for (const auto& p : parts) realization.insert(realization.end(), p.begin(), p.end());
      long long nu = 0;
      std::size_t first_len = parts.front().size();
      std::size_t last_len = parts.back().size();
      for (std::size_t start = 0; start + gamma.size() <= realization.size(); ++start) {
        if (!std::equal(gamma.begin(), gamma.end(), realization.begin() + start)) continue;
        std::size_t end = start + gamma.size();
        if (l == 1) {
          ++nu;
        } else {
          if (start < first_len && end > realization.size() - last_len) ++nu;
        }
      }
      if (nu > 0) out.emplace_back(w, nu);
    }
  }
  return out;
}

double TrainTrackSubstitution::word_frequency(const Word& unit_word) const {
  const int l = static_cast<int>(unit_word.size());
  auto& cache = freq_cache_[l];
  auto hit = cache.find(unit_word);
  if (hit != cache.end()) return hit->second;

  InducedSubstitution ind = induce(zeta_, l, seed_letter_);
  int target = ind.index_of(unit_word);
  if (target < 0) {
    cache[unit_word] = 0.0;
    return 0.0;
  }
  TransitionMatrix tm = transition_matrix(ind.sub());
  const int n = static_cast<int>(ind.alphabet_words().size());
  int seed_col = -1;
  for (int j = 0; j < n; ++j) {
    if (letter_index(ind.alphabet_words()[j][0]) == seed_letter_) {
      seed_col = j;
      break;
    }
  }
  if (seed_col < 0) throw InternalError("word_frequency: no seed column");

  // closure under producers so the truncated iteration stays exact
  std::set<int> keep{target, seed_col};
  for (bool changed = true; changed;) {
    changed = false;
    for (int w : std::vector<int>(keep.begin(), keep.end())) {
      for (int v = 0; v < n; ++v) {
        if (tm.m(w, v) > 0 && !keep.count(v)) {
          keep.insert(v);
          changed = true;
        }
      }
    }
  }
  std::vector<int> idx(keep.begin(), keep.end());
  std::map<int, int> pos;
  for (std::size_t i = 0; i < idx.size(); ++i) pos[idx[i]] = static_cast<int>(i);
  DMat m(static_cast<int>(idx.size()), static_cast<int>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j)
      m(static_cast<int>(i), static_cast<int>(j)) = static_cast<double>(tm.m(idx[i], idx[j]));

  std::vector<double> v(idx.size(), 0.0);
  v[pos.at(seed_col)] = 1.0;
  int settled = 0;
  bool converged = false;
  double bound = 0;
  for (int it = 0; it < 3000; ++it) {
    std::vector<double> w = m.apply(v);
    for (double& x : w) x /= lambda_;
    double change = 0, mx = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      change = std::max(change, std::fabs(w[i] - v[i]));
      mx = std::max(mx, std::fabs(w[i]));
    }
    bound = std::max(bound, mx);
    if (mx > 1e9)
      throw ConvergenceError(
          "word_frequency: iteration diverges (a sub-block grows at least as fast as the top "
          "stratum)");
    v = std::move(w);
    if (change < 1e-12) {
      if (++settled >= 3) {
        converged = true;
        break;
      }
    } else {
      settled = 0;
    }
  }
  if (!converged) throw ConvergenceError("word_frequency: iteration did not settle");
  double value = v[pos.at(target)];
  cache[unit_word] = value;
  return value;
}

double TrainTrackSubstitution::path_frequency(const Word& gamma) const {
  double total = 0;
  for (const auto& [w, nu] : r_tilde(gamma)) total += static_cast<double>(nu) * word_frequency(w);
  return total;
}

AdapterResult to_substitution(const TrainTrackSystem& tt, const Word& gamma, Letter seed_direction,
                              int cap_pad) {
  long long n = max_relevant_width(tt, gamma);
  AdapterResult res{TrainTrackSubstitution(tt, seed_direction, n, cap_pad), {}, 0.0};
  res.r_tilde = res.sub.r_tilde(gamma);
  res.frequency = res.sub.path_frequency(gamma);
  return res;
}

bool width_cap_stability(const TrainTrackSystem& tt, const Word& gamma, Letter seed_direction,
                         int c, double tol) {
  AdapterResult base = to_substitution(tt, gamma, seed_direction, 1);
  AdapterResult wide = to_substitution(tt, gamma, seed_direction, std::max(1, c));
  return std::fabs(base.frequency - wide.frequency) < tol;
}

}  // namespace relcur
