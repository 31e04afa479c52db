#include "relcur/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>

#include "relcur/errors.hpp"
#include "relcur/kernels.hpp"

namespace relcur {

TrainTrackSystem system_power(const TrainTrackSystem& tt, int p) {
  if (p < 1) throw PreconditionError("system_power: p >= 1 required");
  if (p == 1) return tt;
  std::vector<Word> edge_map;
  for (int e = 0; e < tt.graph().num_edges(); ++e) {
    Word img{static_cast<Letter>(e + 1)};
    for (int i = 0; i < p; ++i) img = tighten(tt.image_of_path(img));
    edge_map.push_back(std::move(img));
  }
  std::vector<std::vector<int>> strata;
  for (int i = 0; i < tt.num_strata(); ++i) strata.push_back(tt.stratum(i));
  TTAnnotations ann = tt.annotations();
  for (auto& lin : ann.linear_edges) lin.exponent *= p;
  return TrainTrackSystem(tt.graph(), std::move(edge_map), std::move(strata), std::move(ann));
}

std::pair<int, Letter> find_seed_direction(const TrainTrackSystem& tt) {
  std::vector<Letter> dirs;
  for (int e : tt.stratum(tt.top_stratum())) {
    dirs.push_back(static_cast<Letter>(e + 1));
    dirs.push_back(static_cast<Letter>(-(e + 1)));
  }
  int best_p = 0;
  Letter best = 0;
  for (Letter d : dirs) {
    Letter x = d;
    bool expands = false;
    for (int p = 1; p <= 2 * static_cast<int>(dirs.size()) + 1; ++p) {
      if (tt.image_of_direction(x).size() >= 2) expands = true;
      x = direction_map(tt, x);
      if (x == d) {
        if (expands && (best == 0 || p < best_p)) {
          best_p = p;
          best = d;
        }
        break;
      }
    }
  }
  if (best == 0)
    throw PreconditionError("find_seed_direction: no expanding self-starting direction on top");
  return {best_p, best};
}

std::vector<Word> default_window(const TrainTrackSystem& tt, int max_len) {
  std::vector<Word> out, frontier;
  for (int e = 0; e < tt.graph().num_edges(); ++e) {
    frontier.push_back({static_cast<Letter>(e + 1)});
    frontier.push_back({static_cast<Letter>(-(e + 1))});
  }
  for (int l = 1; l <= max_len; ++l) {
    if (l > 1) {
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
      frontier = std::move(next);
    }
    for (const Word& w : frontier)
      if (tt.crosses_top(w)) out.push_back(w);
  }
  return out;
}

namespace {

// Minimal p with phi^p(d) starting at d and expanding; 0 when there is none.
int seed_power_for_direction(const TrainTrackSystem& tt, Letter d) {
  Letter x = d;
  bool expands = false;
  for (int p = 1; p <= 2 * tt.graph().num_edges() + 1; ++p) {
    if (tt.image_of_direction(x).size() >= 2) expands = true;
    x = direction_map(tt, x);
    if (x == d) return expands ? p : 0;
  }
  return 0;
}

}  // namespace

StableCurrentResult stable_current(const TrainTrackSystem& tt, Letter seed_direction,
                                   const std::vector<Word>& window) {
  int power = seed_power_for_direction(tt, seed_direction);
  if (power == 0)
    throw PreconditionError("stable_current: phi^p(seed) never begins with the seed direction");
  TrainTrackSystem powered = system_power(tt, power);
  const TrainTrackSystem& sys = power == 1 ? tt : powered;

  long long width = 0;
  for (const Word& v : window) {
    width = std::max(width, max_relevant_width(sys, v));
    width = std::max(width, max_relevant_width(sys, invert(v)));
  }
  TrainTrackSubstitution sub(sys, seed_direction, width, 1);

  StableCurrentResult out;
  out.seed = seed_direction;
  out.power_used = power;
  out.lambda = sub.lambda();
  for (const Word& v : window) {
    double d = sub.path_frequency(v) + sub.path_frequency(invert(v));
    out.eta[v] = d;
  }
  return out;
}

StableCurrentResult stable_current(const TrainTrackSystem& tt, const std::vector<Word>& window) {
  return stable_current(tt, find_seed_direction(tt).second, window);
}

namespace {

double circle_cover(double circumference, const std::vector<double>& centers, double radius) {
  if (centers.empty() || radius <= 0) return 0.0;
  if (2 * radius >= circumference) return circumference;
  // split each arc into linear segments on [0, C)
  std::vector<std::pair<double, double>> segs;
  for (double c : centers) {
    double lo = std::fmod(c - radius, circumference);
    if (lo < 0) lo += circumference;
    double hi = lo + 2 * radius;
    if (hi <= circumference) {
      segs.emplace_back(lo, hi);
    } else {
      segs.emplace_back(lo, circumference);
      segs.emplace_back(0.0, hi - circumference);
    }
  }
  std::sort(segs.begin(), segs.end());
  double total = 0, cur_lo = segs[0].first, cur_hi = segs[0].second;
  for (std::size_t i = 1; i < segs.size(); ++i) {
    if (segs[i].first <= cur_hi) {
      cur_hi = std::max(cur_hi, segs[i].second);
    } else {
      total += cur_hi - cur_lo;
      cur_lo = segs[i].first;
      cur_hi = segs[i].second;
    }
  }
  total += cur_hi - cur_lo;
  return std::min(total, circumference);
}

}  // namespace

GoodnessReport goodness(const TrainTrackSystem& tt, const TurnClassification& turns,
                        const Word& loop, double critical_len) {
  if (!tt.crosses_top(loop))
    throw PreconditionError("goodness: loop has zero r-length (no top-stratum edges)");
  GoodnessReport rep;
  const std::size_t n = loop.size();
  rep.l_r = r_length(tt, loop);
  std::vector<double> boundary(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    boundary[i + 1] = boundary[i] + tt.metric(letter_index(loop[i]));
  std::vector<double> illegal_positions;
  for (std::size_t i = 0; i < n; ++i) {
    Letter a = inverse(loop[i]);
    Letter b = loop[(i + 1) % n];
    bool top = tt.edge_in_top(letter_index(a)) || tt.edge_in_top(letter_index(b));
    if (top && turns.is_illegal(a, b))
      illegal_positions.push_back(i + 1 == n ? 0.0 : boundary[i + 1]);
  }
  rep.i_r = static_cast<long long>(illegal_positions.size());
  if (rep.i_r == 0) {
    rep.longest_legal = rep.l_r;
    rep.g_r = rep.l_r;
    rep.b_r = 0;
    rep.goodness = 1.0;
    return rep;
  }
  std::sort(illegal_positions.begin(), illegal_positions.end());
  for (std::size_t i = 0; i < illegal_positions.size(); ++i) {
    double next = i + 1 < illegal_positions.size() ? illegal_positions[i + 1]
                                                   : illegal_positions[0] + rep.l_r;
    rep.longest_legal = std::max(rep.longest_legal, next - illegal_positions[i]);
  }
  rep.b_r = circle_cover(rep.l_r, illegal_positions, critical_len);
  rep.g_r = rep.l_r - rep.b_r;
  rep.goodness = rep.g_r / rep.l_r;
  return rep;
}

GoodnessReport goodness(const TrainTrackSystem& tt, const Word& loop) {
  TurnClassification turns = classify_turns(tt);
  return goodness(tt, turns, loop, critical_length(tt, bcc_estimate(tt)));
}

namespace {

std::map<Word, double> window_coords(const Word& period, const std::vector<Word>& window) {
  std::vector<long long> fwd = count_batch_cyclic(period, window);
  Word inv = invert(period);
  std::vector<long long> bwd = count_batch_cyclic(inv, window);
  std::map<Word, double> out;
  double mx = 0;
  for (std::size_t i = 0; i < window.size(); ++i) {
    double v = static_cast<double>(fwd[i] + bwd[i]);
    out[window[i]] = v;
    mx = std::max(mx, v);
  }
  if (mx > 0)
    for (auto& [w, v] : out) v /= mx;
  return out;
}

}  // namespace

std::vector<IterStep> iterate_class(const TrainTrackSystem& tt, const CyclicWord& alpha, int n,
                                    const std::vector<Word>& window, std::size_t cap) {
  if (!tt.graph().is_path(alpha.letters()) ||
      tt.graph().dir_from(alpha.letters().front()) != tt.graph().dir_to(alpha.letters().back()))
    throw PreconditionError("iterate_class: class is not a loop in the graph");
  TurnClassification turns = classify_turns(tt);
  double lc = critical_length(tt, bcc_estimate(tt));
  std::vector<IterStep> out;
  Word cur = alpha.letters();
  for (int step = 0; step <= n; ++step) {
    IterStep it;
    it.n = step;
    it.length = static_cast<long long>(cur.size());
    it.report = goodness(tt, turns, cur, lc);
    it.coords = window_coords(cur, window);
    it.word = CyclicWord(cur);
    out.push_back(std::move(it));
    if (step == n) break;
    Word next = tighten(tt.image_of_path(cur));
    // cyclic tightening
    while (next.size() >= 2 && next.front() == inverse(next.back())) {
      next.erase(next.begin());
      next.pop_back();
    }
    if (next.empty()) throw PreconditionError("iterate_class: class collapsed");
    if (next.size() > cap)
      throw PreconditionError("iterate_class: word length exceeds cap at step " +
                              std::to_string(step + 1));
    cur = std::move(next);
  }
  return out;
}

bool verify_inverse(const TrainTrackSystem& tt_fwd, const TrainTrackSystem& tt_bwd) {
  if (tt_fwd.graph().n_vertices != 1 || tt_bwd.graph().n_vertices != 1)
    throw PreconditionError(
        "verify_inverse: marking data for non-rose graphs is unsupported; use rose representatives");
  if (tt_fwd.graph().num_edges() != tt_bwd.graph().num_edges()) return false;
  for (int e = 0; e < tt_fwd.graph().num_edges(); ++e) {
    Word x{static_cast<Letter>(e + 1)};
    if (tighten(tt_fwd.image_of_path(tt_bwd.image(e))) != x) return false;
    if (tighten(tt_bwd.image_of_path(tt_fwd.image(e))) != x) return false;
  }
  return true;
}

namespace {

bool is_positive_word(const Word& w) {
  return std::all_of(w.begin(), w.end(), [](Letter l) { return l > 0; });
}

bool is_positive_system(const TrainTrackSystem& tt) {
  for (int e = 0; e < tt.graph().num_edges(); ++e)
    if (!is_positive_word(tt.image(e))) return false;
  return true;
}

// Exact count transport for positive systems: cyclic factor counts of the
// iterates evolve by the induced transition matrices, with no cancellation.
class LoopTransport {
 public:
  LoopTransport(const TrainTrackSystem& tt, const Word& loop, int max_len)
      : alphabet_(tt.edge_alphabet().names(), false) {
    std::vector<Word> rules;
    for (int e = 0; e < tt.graph().num_edges(); ++e) rules.push_back(tt.image(e));
    sub_ = std::make_unique<Substitution>(alphabet_, std::move(rules));
    for (int l = 1; l <= max_len; ++l) levels_.push_back(Level(*sub_, loop, l));
  }

  void step() {
    for (auto& lvl : levels_) lvl.counts = lvl.m.apply(lvl.counts);
    ++n_;
  }

  int n() const { return n_; }

  double length() const {
    double s = 0;
    for (double c : levels_[0].counts) s += c;
    return s;
  }

  double count(const Word& w) const {
    if (w.empty() || static_cast<int>(w.size()) > static_cast<int>(levels_.size())) return 0.0;
    const Level& lvl = levels_[w.size() - 1];
    auto it = lvl.index.find(w);
    return it == lvl.index.end() ? 0.0 : lvl.counts[it->second];
  }

  std::map<Word, double> coords(const std::vector<Word>& window) const {
    std::map<Word, double> out;
    double mx = 0;
    for (const Word& v : window) {
      double c = 0;
      if (is_positive_word(v)) c += count(v);
      Word iv = invert(v);
      if (is_positive_word(iv)) c += count(iv);
      out[v] = c;
      mx = std::max(mx, c);
    }
    if (mx > 0)
      for (auto& [w, v] : out) v /= mx;
    return out;
  }

  // illegal-turn count from cyclic length-2 factor counts
  double illegal_turns(const TrainTrackSystem& tt, const TurnClassification& turns) const {
    double total = 0;
    const Level& lvl = levels_[1];
    for (const auto& [w, idx] : lvl.index) {
      Letter a = inverse(w[0]);
      Letter b = w[1];
      bool top = tt.edge_in_top(letter_index(a)) || tt.edge_in_top(letter_index(b));
      if (top && turns.is_illegal(a, b)) total += lvl.counts[idx];
    }
    return total;
  }

  double metric_length(const TrainTrackSystem& tt) const {
    double s = 0;
    const Level& lvl = levels_[0];
    for (const auto& [w, idx] : lvl.index) s += tt.metric(letter_index(w[0])) * lvl.counts[idx];
    return s;
  }

 private:
  struct Level {
    Level(const Substitution& z, const Word& loop, int l) {
      // factor discovery: cyclic factors of the loop saturated under zeta_l
      std::deque<Word> queue;
      auto add = [&](const Word& w) {
        if (index.emplace(w, static_cast<int>(words.size())).second) {
          words.push_back(w);
          queue.push_back(w);
        }
      };
      const std::size_t n = loop.size();
      for (std::size_t p = 0; p < n; ++p) {
        Word w;
        for (int j = 0; j < l; ++j) w.push_back(loop[(p + j) % n]);
        add(w);
      }
      auto image_words = [&](const Word& w) {
        Word zw = z.apply(w);
        std::size_t count = z.rule(letter_index(w[0])).size();
        std::vector<Word> out;
        for (std::size_t p = 0; p < count; ++p) out.emplace_back(zw.begin() + p, zw.begin() + p + l);
        return out;
      };
      while (!queue.empty()) {
        Word w = queue.front();
        queue.pop_front();
        for (const Word& u : image_words(w)) add(u);
      }
      // transition matrix over the discovered factor set
      m = DMat(static_cast<int>(words.size()), static_cast<int>(words.size()));
      for (std::size_t j = 0; j < words.size(); ++j)
        for (const Word& u : image_words(words[j])) m(index.at(u), static_cast<int>(j)) += 1.0;
      counts.assign(words.size(), 0.0);
      for (std::size_t p = 0; p < n; ++p) {
        Word w;
        for (int j = 0; j < l; ++j) w.push_back(loop[(p + j) % n]);
        counts[index.at(w)] += 1.0;
      }
    }
    std::vector<Word> words;
    std::unordered_map<Word, int, WordHash> index;
    DMat m;
    std::vector<double> counts;
  };

  Alphabet alphabet_;
  std::unique_ptr<Substitution> sub_;
  std::vector<Level> levels_;
  int n_ = 0;
};

double table_distance(const std::map<Word, double>& a, const std::map<Word, double>& b) {
  double d = 0;
  for (const auto& [w, v] : a) {
    auto it = b.find(w);
    double u = it == b.end() ? 0.0 : it->second;
    d = std::max(d, std::fabs(v - u));
  }
  return d;
}

std::map<Word, double> normalized_eta(const StableCurrentResult& sc) {
  std::map<Word, double> out = sc.eta;
  double mx = 0;
  for (const auto& [w, v] : out) mx = std::max(mx, v);
  if (mx > 0)
    for (auto& [w, v] : out) v /= mx;
  return out;
}

}  // namespace

NSExperimentReport ns_experiment(const TrainTrackSystem& tt_fwd, const TrainTrackSystem& tt_bwd,
                                 const FreeFactorSystem* ffs, const CyclicWord& alpha,
                                 const NSOptions& opts) {
  if (!verify_inverse(tt_fwd, tt_bwd))
    throw PreconditionError("ns_experiment: the systems are not inverse to each other");
  if (!tt_fwd.crosses_top(alpha.letters()))
    throw PreconditionError("ns_experiment: class does not cross the top stratum");
  if (!opts.assume_separable) {
    if (!ffs)
      throw PreconditionError("ns_experiment: free factor system required for the separability check");
    auto verdict = decide_separable(alpha, *ffs);
    if (verdict.kind == SeparabilityVerdict::Kind::kNotSeparable)
      throw PreconditionError("ns_experiment: class is not A-separable");
    if (verdict.kind == SeparabilityVerdict::Kind::kInconclusive)
      throw PreconditionError(
          "ns_experiment: separability undecided within budget; pass assume_separable to override");
  }

  NSExperimentReport rep;
  rep.window = default_window(tt_fwd, opts.window_len);

  auto run_direction = [&](const TrainTrackSystem& tt, char dir) {
    StableCurrentResult sc = stable_current(tt, rep.window);
    std::map<Word, double> target = normalized_eta(sc);
    TurnClassification turns = classify_turns(tt);
    double lc = critical_length(tt, bcc_estimate(tt));
    std::vector<double> distances;

    if (is_positive_system(tt) && is_positive_word(alpha.letters())) {
      LoopTransport transport(tt, alpha.letters(), opts.window_len);
      for (int n = 0; n <= opts.n_max; ++n) {
        NSStep step;
        step.n = n;
        step.direction = dir;
        step.length = transport.length();
        step.distance = table_distance(transport.coords(rep.window), target);
        double i_r = transport.illegal_turns(tt, turns);
        if (i_r == 0) {
          step.goodness = 1.0;
        } else {
          double l_r = transport.metric_length(tt);
          step.goodness = std::max(0.0, 1.0 - 2.0 * lc * i_r / l_r);
        }
        rep.steps.push_back(step);
        distances.push_back(step.distance);
        if (n < opts.n_max) transport.step();
      }
    } else {
      Word cur = alpha.letters();
      for (int n = 0; n <= opts.n_max; ++n) {
        NSStep step;
        step.n = n;
        step.direction = dir;
        step.length = static_cast<double>(cur.size());
        step.distance = table_distance(window_coords(cur, rep.window), target);
        step.goodness = goodness(tt, turns, cur, lc).goodness;
        rep.steps.push_back(step);
        distances.push_back(step.distance);
        if (n == opts.n_max) break;
        Word next = tighten(tt.image_of_path(cur));
        while (next.size() >= 2 && next.front() == inverse(next.back())) {
          next.erase(next.begin());
          next.pop_back();
        }
        if (next.empty() || next.size() > opts.cap) break;  // truncated trace stays diagnostic
        cur = std::move(next);
      }
    }
    bool converged = distances.size() >= 3;
    for (std::size_t i = distances.size() >= 3 ? distances.size() - 3 : 0; i < distances.size(); ++i)
      converged = converged && distances[i] < opts.eps;
    return converged;
  };

  rep.forward_converged = run_direction(tt_fwd, 'f');
  rep.backward_converged = run_direction(tt_bwd, 'b');
  if (rep.forward_converged)
    rep.verdict = "forward iterates converge to the stable current";
  else if (rep.backward_converged)
    rep.verdict = "backward iterates converge to the unstable current";
  else
    rep.verdict = "inconclusive within n_max";
  return rep;
}

BackwardGrowthProbe backward_growth_probe(const TrainTrackSystem& tt_fwd,
                                          const TrainTrackSystem& tt_bwd, const CyclicWord& alpha,
                                          int n, double l0, std::size_t cap) {
  BackwardGrowthProbe probe;
  // Illegal turns are counted in the forward structure; tightened forward
  // iteration would erase them, backward iteration is expected to grow them.
  TurnClassification turns = classify_turns(tt_fwd);
  Word cur = alpha.letters();
  GoodnessReport rep0;
  try {
    rep0 = goodness(tt_fwd, turns, cur, critical_length(tt_fwd, bcc_estimate(tt_fwd)));
  } catch (const PreconditionError&) {
    probe.note = "class does not cross the top stratum";
    return probe;
  }
  if (rep0.i_r < 5) {
    probe.note = "fewer than five illegal turns; probe skipped";
    return probe;
  }
  if (rep0.longest_legal > l0) {
    probe.note = "legal segments exceed the supplied bound; probe skipped";
    return probe;
  }
  probe.applicable = true;
  for (int step = 0; step <= n; ++step) {
    probe.i_r_trace.push_back(illegal_turn_count(tt_fwd, turns, cur, true));
    if (step == n) break;
    Word next = tighten(tt_bwd.image_of_path(cur));
    while (next.size() >= 2 && next.front() == inverse(next.back())) {
      next.erase(next.begin());
      next.pop_back();
    }
    if (next.empty() || next.size() > cap) {
      probe.note = "trace truncated by the length cap";
      break;
    }
    cur = std::move(next);
  }
  return probe;
}

}  // namespace relcur
