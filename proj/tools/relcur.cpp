// Command-line front end: one subcommand per library operation, CSV output,
// plus a repro command replaying the bundled fixtures against golden files.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "relcur/csv.hpp"
#include "relcur/currents.hpp"
#include "relcur/dynamics.hpp"
#include "relcur/errors.hpp"
#include "relcur/substitution.hpp"
#include "relcur/system_file.hpp"
#include "relcur/whitehead.hpp"

using namespace relcur;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

SystemFile load_system(const std::string& path) { return parse_system(slurp(path)); }

int parse_seed_index(const Alphabet& ab, const std::string& token) {
  int i = ab.find(token);
  if (i < 0) throw PreconditionError("unknown seed letter '" + token + "'");
  return i;
}

Letter parse_direction(const Alphabet& ab, const std::string& token) {
  Word w = ab.parse_word(token);
  if (w.size() != 1) throw PreconditionError("seed must be a single direction");
  return w[0];
}

FreeFactorSystem require_ffs(const SystemFile& sf, const Alphabet& ab) {
  auto ffs = sf.free_factor_system(ab);
  if (!ffs) throw PreconditionError("system file declares no free factor system (factor lines)");
  return *ffs;
}

std::string cmd_matrix(const SystemFile& sf, int induce_l, bool crossing,
                       const std::string& seed) {
  if (sf.kind == SystemFile::Kind::kSubstitution) {
    Substitution z = sf.to_substitution();
    if (induce_l <= 1 && !crossing) {
      BlockStructure bs = block_structure(z);
      TransitionMatrix tm = block_ordered_matrix(z, bs);
      return matrix_csv(tm.m, tm.labels);
    }
    int seed_idx = seed.empty() ? find_seed(z, block_structure(z).blocks[0]).letter
                                : parse_seed_index(z.alphabet(), seed);
    InducedSubstitution ind = induce(z, std::max(induce_l, 1), seed_idx);
    TransitionMatrix tm = crossing ? restrict_to_crossing(ind) : transition_matrix(ind.sub());
    return matrix_csv(tm.m, tm.labels);
  }
  TrainTrackSystem tt = sf.to_traintrack();
  Letter dir =
      seed.empty() ? find_seed_direction(tt).second : parse_direction(tt.edge_alphabet(), seed);
  TrainTrackSubstitution sub(tt, dir, max_relevant_width(tt, {}), 1);
  if (induce_l <= 1 && !crossing) {
    TransitionMatrix tm = transition_matrix(sub.zeta());
    return matrix_csv(tm.m, tm.labels);
  }
  InducedSubstitution ind = induce(sub.zeta(), std::max(induce_l, 1), sub.seed_letter());
  TransitionMatrix tm = crossing ? restrict_to_crossing(ind) : transition_matrix(ind.sub());
  return matrix_csv(tm.m, tm.labels);
}

std::string eigen_rows(const std::vector<std::complex<double>>& eig) {
  std::vector<std::complex<double>> sorted = eig;
  std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  std::ostringstream out;
  for (auto e : sorted) out << format_double(e.real()) << ',' << format_double(e.imag()) << '\n';
  return out.str();
}

std::string cmd_spectrum(const SystemFile& sf, int induce_l, const std::string& seed, double tol) {
  Substitution z = sf.to_substitution();
  BlockStructure bs = block_structure(z);
  TransitionMatrix tm = block_ordered_matrix(z, bs);
  std::ostringstream out;
  out << "re,im\n" << eigen_rows(spectrum(tm));
  if (induce_l >= 2) {
    int seed_idx =
        seed.empty() ? find_seed(z, bs.blocks[0]).letter : parse_seed_index(z.alphabet(), seed);
    InducedSubstitution ind = induce(z, induce_l, seed_idx);
    TransitionMatrix tml = transition_matrix(ind.sub());
    out << "#induced\n" << eigen_rows(spectrum(tml));
    SpectrumReport rep = compare_spectra(tm, tml, tol);
    out << "#contained," << (rep.contained ? 1 : 0) << '\n';
    out << "#extras_bounded," << (rep.extras_bounded ? 1 : 0) << '\n';
    out << "#max_match_error," << format_double(rep.max_match_error) << '\n';
    out << "#max_extra_modulus," << format_double(rep.max_extra_modulus) << '\n';
  }
  return out.str();
}

std::string cmd_induce(const SystemFile& sf, int length, const std::string& seed) {
  Substitution z = sf.to_substitution();
  int seed_idx = seed.empty() ? find_seed(z, block_structure(z).blocks[0]).letter
                              : parse_seed_index(z.alphabet(), seed);
  InducedSubstitution ind = induce(z, length, seed_idx);
  std::ostringstream out;
  out << "word,image\n";
  const Alphabet& zab = ind.sub().alphabet();
  for (int i = 0; i < zab.size(); ++i) {
    out << zab.name(i) << ',';
    const Word& rule = ind.sub().rule(i);
    for (std::size_t j = 0; j < rule.size(); ++j) {
      if (j) out << '.';
      out << zab.name(letter_index(rule[j]));
    }
    out << '\n';
  }
  return out.str();
}

std::string cmd_fixed_point(const SystemFile& sf, const std::string& seed, int n,
                            long long prefix_len) {
  Substitution z = sf.to_substitution();
  int seed_idx = parse_seed_index(z.alphabet(), seed);
  Word w = prefix_len > 0 ? fixed_point_prefix(z, seed_idx, static_cast<std::size_t>(prefix_len))
                          : iterate_letter(z, seed_idx, n);
  return z.alphabet().format_word(w) + "\n";
}

std::string cmd_freq(const SystemFile& sf, const std::string& seed, int window_len,
                     const std::string& method, double tol, int max_iter) {
  Substitution z = sf.to_substitution();
  int seed_idx = seed.empty() ? find_seed(z, block_structure(z).blocks[0]).letter
                              : parse_seed_index(z.alphabet(), seed);
  FrequencyOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  if (method == "matrix")
    opts.method = FrequencyMethod::kMatrix;
  else if (method == "direct")
    opts.method = FrequencyMethod::kDirect;
  else if (method == "both")
    opts.method = FrequencyMethod::kBoth;
  else
    throw PreconditionError("unknown method '" + method + "'");
  std::vector<Word> window = occurring_crossing_words(z, seed_idx, window_len);
  FrequencyTable table = frequencies(z, seed_idx, window, opts);
  std::ostringstream out;
  out << "word,value\n";
  for (const Word& w : window)
    out << z.alphabet().format_word(w) << ',' << format_double(table.values.at(w)) << '\n';
  out << "#lambda," << format_double(table.lambda) << '\n';
  out << "#power," << table.power_used << '\n';
  return out.str();
}

std::string cmd_current(const SystemFile& sf, const std::string& class_word, int depth) {
  Alphabet ab = sf.alphabet();
  FreeFactorSystem ffs = require_ffs(sf, ab);
  CyclicWord alpha = cyclic_reduce(reduce(ab.parse_word(class_word))).core;
  RelativeCurrent eta = rational_current(alpha, ffs, depth);
  std::ostringstream out;
  out << "word,value\n";
  for (const Word& w : current_domain(ffs, depth))
    out << ab.format_word(w) << ',' << format_double(eta.value(w)) << '\n';
  return out.str();
}

RelativeCurrent load_current_csv(const std::string& path, const FreeFactorSystem& ffs,
                                 const Alphabet& ab, int depth) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open '" + path + "'");
  RelativeCurrent eta(ffs, depth);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos) throw PreconditionError("bad current CSV row: " + line);
    Word w = ab.parse_word(line.substr(0, comma));
    eta.set(w, std::stod(line.substr(comma + 1)));
  }
  // loading validates additivity over extensions staying outside the factors
  double worst = 0;
  for (const auto& [w, v] : eta.table()) {
    if (static_cast<int>(w.size()) >= depth) continue;
    double sum = 0;
    bool complete = true;
    for (int i = 1; i <= ab.size(); ++i) {
      for (Letter e : {static_cast<Letter>(i), static_cast<Letter>(-i)}) {
        if (w.back() == inverse(e)) continue;
        Word we = w;
        we.push_back(e);
        if (!ffs.in_f_minus_a(we)) {
          complete = false;
          continue;
        }
        sum += eta.value(we);
      }
    }
    if (complete) worst = std::max(worst, std::fabs(v - sum));
  }
  if (worst > 1e-6)
    throw PreconditionError("current CSV fails additivity by " + format_double(worst));
  return eta;
}

std::string cmd_extend(const SystemFile& sf, const std::string& class_word,
                       const std::string& current_file, int depth,
                       const std::vector<std::string>& seed_values) {
  Alphabet ab = sf.alphabet();
  FreeFactorSystem ffs = require_ffs(sf, ab);
  RelativeCurrent eta(ffs, depth);
  if (!current_file.empty()) {
    eta = load_current_csv(current_file, ffs, ab, depth);
  } else if (!class_word.empty()) {
    eta = rational_current(cyclic_reduce(reduce(ab.parse_word(class_word))).core, ffs, depth);
  } else {
    throw PreconditionError("extend needs --class or --current");
  }
  std::map<int, double> seeds;
  for (const auto& sv : seed_values) {
    std::size_t eq = sv.find('=');
    if (eq == std::string::npos) throw PreconditionError("seed syntax: letter=value");
    int idx = ab.find(sv.substr(0, eq));
    if (idx < 0) throw PreconditionError("unknown seed letter in '" + sv + "'");
    seeds[idx] = std::stod(sv.substr(eq + 1));
  }
  ExtensionReport rep;
  SignedMeasuredCurrent ext = k_extension(eta, depth, seeds, &rep);
  SignedMeasuredCurrent fixed = nonnegative_fix(ext);
  std::ostringstream out;
  out << "word,value,fixed\n";
  for (int l = 1; l <= depth; ++l) {
    for (const Word& w : reduced_words(ab.size(), l)) {
      if (RelativeCurrent::canonical(w) != w) continue;
      out << ab.format_word(w) << ',' << format_double(ext.value(w)) << ','
          << format_double(fixed.value(w)) << '\n';
    }
  }
  out << "#solve_residual," << format_double(rep.max_solve_residual) << '\n';
  out << "#consistency_residual," << format_double(rep.max_consistency_residual) << '\n';
  out << "#additivity_residual," << format_double(ext.additivity_residual()) << '\n';
  return out.str();
}

std::string cmd_approx(const SystemFile& sf, const std::vector<std::string>& classes, int depth,
                       double scale) {
  Alphabet ab = sf.alphabet();
  FreeFactorSystem ffs = require_ffs(sf, ab);
  if (classes.empty()) throw PreconditionError("approx needs at least one --class");
  RelativeCurrent mix(ffs, depth);
  for (const auto& c : classes) {
    RelativeCurrent eta = rational_current(cyclic_reduce(reduce(ab.parse_word(c))).core, ffs, depth);
    for (const auto& [w, v] : eta.table()) mix.add(w, v);
  }
  ApproximationConfig cfg;
  cfg.k = depth;
  cfg.scale = scale;
  ApproximationResult res = approximate_by_rationals(mix, cfg);
  std::ostringstream out;
  out << "class,in_f_minus_a\n";
  for (std::size_t i = 0; i < res.classes.size(); ++i)
    out << ab.format_word(res.classes[i].letters()) << ',' << (res.in_f_minus_a[i] ? 1 : 0) << '\n';
  out << "#P," << format_double(res.p_value) << '\n';
  out << "#bound," << format_double(res.bound) << '\n';
  out << "#achieved," << format_double(res.achieved_error) << '\n';
  return out.str();
}

std::string cmd_whitehead(const SystemFile& sf, const std::string& class_word) {
  Alphabet ab = sf.alphabet();
  FreeFactorSystem ffs = require_ffs(sf, ab);
  CyclicWord alpha = cyclic_reduce(reduce(ab.parse_word(class_word))).core;
  std::vector<CyclicWord> fillers;
  for (int f = 0; f < ffs.num_factors(); ++f) fillers.push_back(default_filler(ffs, f));
  WhiteheadGraph g = relative_whitehead_graph(alpha, ffs, fillers);
  std::ostringstream out;
  auto vertex_name = [&](int v) {
    Letter l = static_cast<Letter>(v / 2 + 1);
    if (v % 2) l = inverse(l);
    return ab.format_letter(l);
  };
  out << "graph\n";
  auto adj = g.adjacency();
  for (int v = 0; v < g.num_vertices(); ++v) {
    out << vertex_name(v) << ':';
    for (int w : adj[v]) out << ' ' << vertex_name(w);
    out << '\n';
  }
  SeparabilityVerdict verdict = decide_separable(alpha, ffs);
  switch (verdict.kind) {
    case SeparabilityVerdict::Kind::kSeparable: {
      out << "verdict: Separable\n";
      out << "moves: " << verdict.moves.size() << '\n';
      out << "part_one:";
      for (int i : verdict.part_one) out << ' ' << ab.name(i);
      out << "\npart_two:";
      for (int i : verdict.part_two) out << ' ' << ab.name(i);
      out << "\ntransformed: " << ab.format_word(verdict.transformed_alpha) << '\n';
      break;
    }
    case SeparabilityVerdict::Kind::kNotSeparable:
      out << "verdict: NotSeparable\n";
      out << "certificate: relative Whitehead graph connected with no cut vertex\n";
      break;
    case SeparabilityVerdict::Kind::kInconclusive:
      out << "verdict: Inconclusive\n";
      break;
  }
  return out.str();
}

std::string cmd_goodness(const SystemFile& sf, const std::string& class_word, double bcc_override) {
  TrainTrackSystem tt = sf.to_traintrack();
  const Alphabet& ab = tt.edge_alphabet();
  Word loop = reduce(ab.parse_word(class_word));
  double bcc = bcc_override >= 0 ? bcc_override : bcc_estimate(tt);
  TurnClassification turns = classify_turns(tt);
  GoodnessReport rep = goodness(tt, turns, loop, critical_length(tt, bcc));
  std::ostringstream out;
  out << "key,value\n";
  out << "l_r," << format_double(rep.l_r) << '\n';
  out << "i_r," << rep.i_r << '\n';
  out << "L_r," << format_double(rep.longest_legal) << '\n';
  out << "g_r," << format_double(rep.g_r) << '\n';
  out << "b_r," << format_double(rep.b_r) << '\n';
  out << "goodness," << format_double(rep.goodness) << '\n';
  return out.str();
}

std::string cmd_iterate(const SystemFile& sf, const std::string& class_word, int n,
                        int window_len) {
  TrainTrackSystem tt = sf.to_traintrack();
  const Alphabet& ab = tt.edge_alphabet();
  CyclicWord alpha = cyclic_reduce(reduce(ab.parse_word(class_word))).core;
  auto steps = iterate_class(tt, alpha, n, default_window(tt, window_len));
  std::ostringstream out;
  out << "n,length,i_r,goodness\n";
  for (const auto& s : steps)
    out << s.n << ',' << s.length << ',' << s.report.i_r << ','
        << format_double(s.report.goodness) << '\n';
  return out.str();
}

std::string cmd_ns(const SystemFile& sf_fwd, const SystemFile& sf_bwd,
                   const std::string& class_word, const NSOptions& opts) {
  TrainTrackSystem fwd = sf_fwd.to_traintrack();
  TrainTrackSystem bwd = sf_bwd.to_traintrack();
  Alphabet group_ab = sf_fwd.alphabet();
  auto ffs = sf_fwd.free_factor_system(group_ab);
  CyclicWord alpha = cyclic_reduce(reduce(group_ab.parse_word(class_word))).core;
  NSExperimentReport rep = ns_experiment(fwd, bwd, ffs ? &*ffs : nullptr, alpha, opts);
  std::ostringstream out;
  out << "n,direction,distance,goodness,length\n";
  for (const auto& s : rep.steps)
    out << s.n << ',' << s.direction << ',' << format_double(s.distance) << ','
        << format_double(s.goodness) << ',' << format_double(s.length) << '\n';
  out << "#verdict," << rep.verdict << '\n';
  return out.str();
}

struct ReproCase {
  std::string name;
  std::string golden;
  std::function<std::string()> produce;
};

std::vector<ReproCase> repro_manifest(const fs::path& fixtures) {
  auto sys = [fixtures](const std::string& f) { return load_system((fixtures / f).string()); };
  std::vector<ReproCase> cases;
  cases.push_back({"example1_matrix", "example1_matrix.csv",
                   [=] { return cmd_matrix(sys("example1.sub"), 0, false, ""); }});
  cases.push_back({"example1_m2", "example1_m2.csv",
                   [=] { return cmd_matrix(sys("example1.sub"), 2, false, "b"); }});
  cases.push_back({"example1_crossing2", "example1_crossing2.csv",
                   [=] { return cmd_matrix(sys("example1.sub"), 2, true, "b"); }});
  cases.push_back({"example2_matrix", "example2_matrix.csv",
                   [=] { return cmd_matrix(sys("example2.sub"), 0, false, ""); }});
  cases.push_back({"example2_m2", "example2_m2.csv",
                   [=] { return cmd_matrix(sys("example2.sub"), 2, false, "c"); }});
  cases.push_back({"example2_crossing2", "example2_crossing2.csv",
                   [=] { return cmd_matrix(sys("example2.sub"), 2, true, "c"); }});
  cases.push_back({"example3_crossing2", "example3_crossing2.csv",
                   [=] { return cmd_matrix(sys("example3.sub"), 2, true, "c"); }});
  cases.push_back({"example1_freq2", "example1_freq2.csv",
                   [=] { return cmd_freq(sys("example1.sub"), "b", 2, "both", 1e-9, 500); }});
  cases.push_back({"example1_induce2", "example1_induce2.csv",
                   [=] { return cmd_induce(sys("example1.sub"), 2, "b"); }});
  cases.push_back({"example1_spectrum2", "example1_spectrum2.csv",
                   [=] { return cmd_spectrum(sys("example1.sub"), 2, "b", 1e-6); }});
  cases.push_back({"example2_spectrum2", "example2_spectrum2.csv",
                   [=] { return cmd_spectrum(sys("example2.sub"), 2, "c", 1e-6); }});
  cases.push_back({"example1_fixed3", "example1_fixed3.csv",
                   [=] { return cmd_fixed_point(sys("example1.sub"), "b", 3, 0); }});
  cases.push_back({"nielsen_r5_matrix", "nielsen_r5_matrix.csv",
                   [=] { return cmd_matrix(sys("nielsen_r5.aut"), 0, false, "c"); }});
  cases.push_back({"graph83_matrix", "graph83_matrix.csv",
                   [=] { return cmd_matrix(sys("graph83.graph"), 0, false, "e5"); }});
  cases.push_back({"exceptional_matrix", "exceptional_matrix.csv",
                   [=] { return cmd_matrix(sys("exceptional_r6.aut"), 0, false, "f"); }});
  cases.push_back({"current_abaBab", "current_abaBab.csv",
                   [=] { return cmd_current(sys("f2.aut"), "abaBab", 4); }});
  cases.push_back({"extend_abaBab", "extend_abaBab.csv",
                   [=] { return cmd_extend(sys("f2.aut"), "abaBab", "", 2, {}); }});
  cases.push_back(
      {"approx_ab", "approx_ab.csv", [=] { return cmd_approx(sys("f2.aut"), {"ab"}, 2, 1e4); }});
  cases.push_back({"whitehead_abAB", "whitehead_abAB.txt",
                   [=] { return cmd_whitehead(sys("f2.aut"), "abAB"); }});
  cases.push_back(
      {"whitehead_ab", "whitehead_ab.txt", [=] { return cmd_whitehead(sys("f2.aut"), "ab"); }});
  cases.push_back(
      {"whitehead_cd", "whitehead_cd.txt", [=] { return cmd_whitehead(sys("f4.aut"), "cd"); }});
  cases.push_back({"goodness_cad", "goodness_cad.csv",
                   [=] { return cmd_goodness(sys("example2.aut"), "cad", -1.0); }});
  cases.push_back({"iterate_cd", "iterate_cd.csv",
                   [=] { return cmd_iterate(sys("example2.aut"), "cd", 3, 2); }});
  cases.push_back({"ns_example2", "ns_example2.csv", [=] {
                     NSOptions opts;
                     opts.n_max = 8;
                     opts.window_len = 3;
                     return cmd_ns(sys("example2.aut"), sys("example2_inverse.aut"), "cd", opts);
                   }});
  return cases;
}

int cmd_repro(const std::string& fixtures_dir, bool update) {
  fs::path fixtures(fixtures_dir);
  fs::path golden_dir = fixtures / "golden";
  int failures = 0;
  for (const auto& c : repro_manifest(fixtures)) {
    std::string produced;
    try {
      produced = c.produce();
    } catch (const Error& e) {
      std::cout << "FAIL " << c.name << " (error: " << e.what() << ")\n";
      ++failures;
      continue;
    }
    fs::path golden = golden_dir / c.golden;
    if (update) {
      fs::create_directories(golden_dir);
      std::ofstream out(golden);
      out << produced;
      std::cout << "WROTE " << c.name << '\n';
      continue;
    }
    std::string expected;
    try {
      expected = slurp(golden.string());
    } catch (const Error&) {
      std::cout << "FAIL " << c.name << " (missing golden " << golden.string() << ")\n";
      ++failures;
      continue;
    }
    std::string why;
    if (csv_equivalent(produced, expected, 1e-9, &why)) {
      std::cout << "PASS " << c.name << '\n';
    } else {
      std::cout << "FAIL " << c.name << " (" << why << ")\n";
      ++failures;
    }
  }
  if (!update)
    std::cout << (failures == 0 ? "repro: all cases match\n"
                                : "repro: " + std::to_string(failures) + " case(s) differ\n");
  return failures == 0 ? 0 : 1;
}

// Renders CSV as aligned columns for terminal output.
std::string tableize(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(csv);
  std::string line;
  std::vector<std::size_t> widths;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cur;
    std::istringstream ls(line);
    while (std::getline(ls, cur, ',')) cells.push_back(cur);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (widths.size() <= i) widths.push_back(0);
      widths[i] = std::max(widths[i], cells[i].size());
    }
    rows.push_back(std::move(cells));
  }
  std::ostringstream out;
  for (const auto& cells : rows) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << "  ";
      out << cells[i];
      if (i + 1 < cells.size()) out << std::string(widths[i] - cells[i].size(), ' ');
    }
    out << '\n';
  }
  return out.str();
}

void emit(const std::string& content, const std::string& out_file, const std::string& format) {
  if (!out_file.empty()) {
    std::ofstream out(out_file);
    if (!out) throw PreconditionError("cannot write '" + out_file + "'");
    out << content;
    return;
  }
  std::cout << (format == "csv" ? content : tableize(content));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relative-current toolkit"};
  app.require_subcommand(1);

  std::string system_path, inverse_path, out_file, format = "table";
  std::string seed, method = "both", class_word, current_file, fixtures = "fixtures";
  int depth = 2, window_len = 4, n = 0, induce_l = 0, max_iter = 500;
  long long prefix_len = 0;
  double tol = 1e-9, scale = 1e4, eps = 1e-3, bcc_override = -1.0;
  bool crossing = false, assume_separable = false, update = false;
  std::vector<std::string> classes, seed_values;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--system", system_path, "system file")->required();
    cmd->add_option("--out", out_file, "write CSV to a file");
    cmd->add_option("--format", format, "csv|table (stdout only)");
  };

  auto* matrix = app.add_subcommand("matrix", "transition matrix (CSV with labels)");
  add_common(matrix);
  matrix->add_option("--induce", induce_l, "induced matrix M_l");
  matrix->add_flag("--crossing", crossing, "restrict to the crossing block B_l");
  matrix->add_option("--seed", seed, "seed letter for the induced alphabet");

  auto* spectrum_cmd = app.add_subcommand("spectrum", "eigenvalues; with --induce, containment");
  add_common(spectrum_cmd);
  spectrum_cmd->add_option("--induce", induce_l, "compare against M_l");
  spectrum_cmd->add_option("--seed", seed, "seed letter");
  spectrum_cmd->add_option("--tol", tol, "matching tolerance");

  auto* induce_cmd = app.add_subcommand("induce", "induced substitution rules");
  add_common(induce_cmd);
  induce_cmd->add_option("--length", induce_l, "factor length l")->required();
  induce_cmd->add_option("--seed", seed, "seed letter");

  auto* fixed = app.add_subcommand("fixed-point", "iterate a letter or print a fixed-word prefix");
  add_common(fixed);
  fixed->add_option("--seed", seed, "letter")->required();
  fixed->add_option("-n", n, "number of applications");
  fixed->add_option("--length", prefix_len, "prefix length of the fixed word");

  auto* freq = app.add_subcommand("freq", "frequencies of crossing words (word,value)");
  add_common(freq);
  freq->add_option("--seed", seed, "seed letter");
  freq->add_option("--window", window_len, "max word length");
  freq->add_option("--method", method, "matrix|direct|both");
  freq->add_option("--tol", tol, "convergence tolerance");
  freq->add_option("--max-iter", max_iter, "iteration cap");

  auto* current = app.add_subcommand("current", "rational relative current table (word,value)");
  add_common(current);
  current->add_option("--class", class_word, "conjugacy class word")->required();
  current->add_option("--depth", depth, "table depth k");

  auto* extend = app.add_subcommand("extend", "k-extension to a signed measured current");
  add_common(extend);
  extend->add_option("--class", class_word, "conjugacy class word");
  extend->add_option("--current", current_file, "current CSV to extend");
  extend->add_option("--depth", depth, "depth k");
  extend->add_option("--seed-value", seed_values, "factor letter seed, letter=value");

  auto* approx = app.add_subcommand("approx", "rational approximation of a current mixture");
  add_common(approx);
  approx->add_option("--class", classes, "component class (repeatable)");
  approx->add_option("--depth", depth, "depth k");
  approx->add_option("--scale", scale, "scale R");

  auto* wh = app.add_subcommand("whitehead", "relative Whitehead graph and separability verdict");
  add_common(wh);
  wh->add_option("--class", class_word, "conjugacy class word")->required();

  auto* good = app.add_subcommand("goodness", "goodness report of a loop");
  add_common(good);
  good->add_option("--class", class_word, "loop (edge word)")->required();
  good->add_option("--bcc", bcc_override, "override the bounded-cancellation estimate");

  auto* iter = app.add_subcommand("iterate", "tightened iterates with goodness");
  add_common(iter);
  iter->add_option("--class", class_word, "loop")->required();
  iter->add_option("-n", n, "iterations");
  iter->add_option("--window", window_len, "window length");

  auto* ns = app.add_subcommand("ns", "north-south convergence experiment");
  add_common(ns);
  ns->add_option("--inverse", inverse_path, "inverse representative system file")->required();
  ns->add_option("--class", class_word, "class")->required();
  ns->add_option("-n", n, "max iterations");
  ns->add_option("--eps", eps, "convergence threshold");
  ns->add_option("--window", window_len, "window length");
  ns->add_flag("--assume-separable", assume_separable, "skip the separability check");

  auto* repro = app.add_subcommand("repro", "replay bundled fixtures against golden files");
  repro->add_option("--fixtures", fixtures, "fixtures directory");
  repro->add_flag("--update", update, "rewrite the golden files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (matrix->parsed()) {
      emit(cmd_matrix(load_system(system_path), induce_l, crossing, seed), out_file, format);
    } else if (spectrum_cmd->parsed()) {
      emit(cmd_spectrum(load_system(system_path), induce_l, seed, tol), out_file, format);
    } else if (induce_cmd->parsed()) {
      emit(cmd_induce(load_system(system_path), induce_l, seed), out_file, format);
    } else if (fixed->parsed()) {
      emit(cmd_fixed_point(load_system(system_path), seed, n, prefix_len), out_file, format);
    } else if (freq->parsed()) {
      emit(cmd_freq(load_system(system_path), seed, window_len, method, tol, max_iter), out_file,
           format);
    } else if (current->parsed()) {
      emit(cmd_current(load_system(system_path), class_word, depth), out_file, format);
    } else if (extend->parsed()) {
      emit(cmd_extend(load_system(system_path), class_word, current_file, depth, seed_values),
           out_file, format);
    } else if (approx->parsed()) {
      emit(cmd_approx(load_system(system_path), classes, depth, scale), out_file, format);
    } else if (wh->parsed()) {
      emit(cmd_whitehead(load_system(system_path), class_word), out_file, format);
    } else if (good->parsed()) {
      emit(cmd_goodness(load_system(system_path), class_word, bcc_override), out_file, format);
    } else if (iter->parsed()) {
      emit(cmd_iterate(load_system(system_path), class_word, n, window_len), out_file, format);
    } else if (ns->parsed()) {
      NSOptions opts;
      opts.n_max = n > 0 ? n : 12;
      opts.eps = eps;
      opts.window_len = window_len;
      opts.assume_separable = assume_separable;
      emit(cmd_ns(load_system(system_path), load_system(inverse_path), class_word, opts), out_file,
           format);
    } else if (repro->parsed()) {
      return cmd_repro(fixtures, update);
    }
  } catch (const ConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << '\n';
    return 3;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
