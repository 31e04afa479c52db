#include "relcur/system_file.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "relcur/errors.hpp"

namespace relcur {

namespace {

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw PreconditionError("line " + std::to_string(line) + ": " + msg);
}

}  // namespace

SystemFile parse_system(const std::string& text) {
  SystemFile sf;
  bool kind_seen = false;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  std::map<std::string, int> rule_lines;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = strip(line);
    if (line.empty()) continue;

    if (line.rfind("kind:", 0) == 0) {
      std::string k = strip(line.substr(5));
      if (k == "substitution")
        sf.kind = SystemFile::Kind::kSubstitution;
      else if (k == "automorphism")
        sf.kind = SystemFile::Kind::kAutomorphism;
      else if (k == "graph")
        sf.kind = SystemFile::Kind::kGraph;
      else
        fail(line_no, "unknown kind '" + k + "'");
      kind_seen = true;
      continue;
    }
    if (line.rfind("letters:", 0) == 0) {
      sf.letters = tokens(line.substr(8));
      if (sf.letters.empty()) fail(line_no, "empty letters declaration");
      for (const auto& l : sf.letters)
        if (l.size() != 1 || !std::islower(static_cast<unsigned char>(l[0])))
          fail(line_no, "rose letters must be single lowercase characters");
      continue;
    }
    auto toks = tokens(line);
    if (toks.empty()) continue;
    const std::string& head = toks[0];
    auto expect_eq = [&](std::size_t pos) {
      if (pos >= toks.size() || toks[pos] != "=") fail(line_no, "expected '='");
    };
    if (head == "vertex") {
      for (std::size_t i = 1; i < toks.size(); ++i) sf.vertices.push_back(toks[i]);
    } else if (head == "edge") {
      if (toks.size() != 5) fail(line_no, "edge syntax: edge e1 = v1 v2");
      expect_eq(2);
      sf.graph_edges.push_back({toks[1], toks[3], toks[4]});
    } else if (head == "rule" || head == "map") {
      if (toks.size() < 4) fail(line_no, head + " syntax: " + head + " x = <word>");
      expect_eq(2);
      if (rule_lines.count(toks[1])) fail(line_no, "duplicate rule for '" + toks[1] + "'");
      rule_lines[toks[1]] = line_no;
      std::string image;
      for (std::size_t i = 3; i < toks.size(); ++i) {
        if (i > 3) image += ' ';
        image += toks[i];
      }
      sf.rules.push_back({toks[1], image});
    } else if (head == "factor") {
      if (toks.size() < 4) fail(line_no, "factor syntax: factor A1 = a b");
      expect_eq(2);
      SystemFile::Factor f{toks[1], {}};
      for (std::size_t i = 3; i < toks.size(); ++i) f.letters.push_back(toks[i]);
      sf.factors.push_back(std::move(f));
    } else if (head == "stratum") {
      if (toks.size() < 4) fail(line_no, "stratum syntax: stratum H1 = c d");
      expect_eq(2);
      SystemFile::Stratum s{toks[1], {}};
      for (std::size_t i = 3; i < toks.size(); ++i) s.edges.push_back(toks[i]);
      sf.strata.push_back(std::move(s));
    } else if (head == "inp") {
      if (toks.size() < 4) fail(line_no, "inp syntax: inp sigma = <path>");
      expect_eq(2);
      std::string path;
      for (std::size_t i = 3; i < toks.size(); ++i) {
        if (i > 3) path += ' ';
        path += toks[i];
      }
      sf.inps.push_back({toks[1], path});
    } else if (head == "linear") {
      if (toks.size() != 6 || toks[2] != "axis" || toks[4] != "exp")
        fail(line_no, "linear syntax: linear e1 axis sigma exp 1");
      sf.linears.push_back({toks[1], toks[3], std::stoi(toks[5])});
    } else if (head == "exceptional") {
      if (toks.size() != 6) fail(line_no, "exceptional syntax: exceptional x = e1 sigma e2");
      expect_eq(2);
      sf.exceptionals.push_back({toks[1], toks[3], toks[4], toks[5]});
    } else if (head == "connecting") {
      if (toks.size() < 4) fail(line_no, "connecting syntax: connecting t = <path>");
      expect_eq(2);
      std::string path;
      for (std::size_t i = 3; i < toks.size(); ++i) {
        if (i > 3) path += ' ';
        path += toks[i];
      }
      sf.connectings.push_back({toks[1], path});
    } else {
      fail(line_no, "unknown directive '" + head + "'");
    }
  }
  if (!kind_seen) fail(line_no, "missing 'kind:' declaration (empty file?)");

  // structural validation with line-independent messages
  if (sf.kind == SystemFile::Kind::kGraph) {
    if (sf.graph_edges.empty()) throw PreconditionError("graph system: no edges declared");
  } else {
    if (sf.letters.empty()) throw PreconditionError("rose system: no letters declared");
    std::map<std::string, bool> declared;
    for (const auto& l : sf.letters) {
      if (declared.count(l)) throw PreconditionError("duplicate letter '" + l + "'");
      declared[l] = true;
    }
    for (const auto& r : sf.rules)
      if (!declared.count(r.letter))
        fail(rule_lines[r.letter], "rule for undeclared letter '" + r.letter + "'");
    if (sf.rules.size() != sf.letters.size())
      throw PreconditionError("every letter needs exactly one rule");
  }
  for (const auto& f : sf.factors) {
    for (const auto& l : f.letters) {
      if (std::find(sf.letters.begin(), sf.letters.end(), l) == sf.letters.end())
        throw PreconditionError("factor " + f.name + " uses undeclared letter '" + l + "'");
    }
  }
  return sf;
}

std::string serialize_system(const SystemFile& sf) {
  std::ostringstream out;
  switch (sf.kind) {
    case SystemFile::Kind::kSubstitution:
      out << "kind: substitution\n";
      break;
    case SystemFile::Kind::kAutomorphism:
      out << "kind: automorphism\n";
      break;
    case SystemFile::Kind::kGraph:
      out << "kind: graph\n";
      break;
  }
  if (!sf.letters.empty()) {
    out << "letters:";
    for (const auto& l : sf.letters) out << ' ' << l;
    out << '\n';
  }
  if (!sf.vertices.empty()) {
    out << "vertex";
    for (const auto& v : sf.vertices) out << ' ' << v;
    out << '\n';
  }
  for (const auto& e : sf.graph_edges)
    out << "edge " << e.name << " = " << e.from << ' ' << e.to << '\n';
  const char* rule_word = sf.kind == SystemFile::Kind::kGraph ? "map" : "rule";
  for (const auto& r : sf.rules) out << rule_word << ' ' << r.letter << " = " << r.image << '\n';
  for (const auto& f : sf.factors) {
    out << "factor " << f.name << " =";
    for (const auto& l : f.letters) out << ' ' << l;
    out << '\n';
  }
  for (const auto& s : sf.strata) {
    out << "stratum " << s.name << " =";
    for (const auto& e : s.edges) out << ' ' << e;
    out << '\n';
  }
  for (const auto& i : sf.inps) out << "inp " << i.name << " = " << i.path << '\n';
  for (const auto& l : sf.linears)
    out << "linear " << l.edge << " axis " << l.axis << " exp " << l.exponent << '\n';
  for (const auto& e : sf.exceptionals)
    out << "exceptional " << e.name << " = " << e.e1 << ' ' << e.axis << ' ' << e.e2 << '\n';
  for (const auto& c : sf.connectings) out << "connecting " << c.name << " = " << c.path << '\n';
  return out.str();
}

Alphabet SystemFile::alphabet() const {
  if (kind == Kind::kGraph) {
    std::vector<std::string> names;
    for (const auto& e : graph_edges) names.push_back(e.name);
    return Alphabet(names, true);
  }
  return Alphabet(letters, true);
}

Substitution SystemFile::to_substitution() const {
  if (kind != Kind::kSubstitution)
    throw PreconditionError("system is not of kind substitution");
  Alphabet ab(letters, false);
  std::vector<Word> rules_by_letter(letters.size());
  std::vector<bool> seen(letters.size(), false);
  for (const auto& r : rules) {
    int i = ab.find(r.letter);
    if (i < 0) throw PreconditionError("rule for undeclared letter '" + r.letter + "'");
    rules_by_letter[i] = ab.parse_word(r.image);
    seen[i] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw PreconditionError("missing rule for letter '" + letters[i] + "'");
  return Substitution(std::move(ab), std::move(rules_by_letter));
}

TrainTrackSystem SystemFile::to_traintrack() const {
  if (kind == Kind::kSubstitution)
    throw PreconditionError("substitution systems carry no train track structure");
  MarkedGraph g;
  Alphabet ab = alphabet();
  if (kind == Kind::kAutomorphism) {
    g = MarkedGraph::rose(letters);
  } else {
    std::map<std::string, int> vid;
    for (const auto& v : vertices) {
      if (vid.count(v)) throw PreconditionError("duplicate vertex '" + v + "'");
      vid[v] = static_cast<int>(vid.size());
    }
    g.n_vertices = static_cast<int>(vid.size());
    for (const auto& e : graph_edges) {
      if (!vid.count(e.from) || !vid.count(e.to))
        throw PreconditionError("edge " + e.name + " references an undeclared vertex");
      g.edges.push_back({e.name, vid.at(e.from), vid.at(e.to)});
    }
  }
  std::vector<Word> edge_map(g.num_edges());
  std::vector<bool> seen(g.num_edges(), false);
  for (const auto& r : rules) {
    int i = ab.find(r.letter);
    if (i < 0) throw PreconditionError("map for undeclared edge '" + r.letter + "'");
    edge_map[i] = ab.parse_word(r.image);
    seen[i] = true;
  }
  for (int i = 0; i < g.num_edges(); ++i)
    if (!seen[i]) throw PreconditionError("missing map for edge '" + g.edges[i].name + "'");

  std::vector<std::vector<int>> strata_ids;
  for (const auto& s : strata) {
    std::vector<int> ids;
    for (const auto& e : s.edges) {
      int i = ab.find(e);
      if (i < 0) throw PreconditionError("stratum " + s.name + " uses undeclared edge '" + e + "'");
      ids.push_back(i);
    }
    std::sort(ids.begin(), ids.end());
    strata_ids.push_back(std::move(ids));
  }

  TTAnnotations ann;
  for (const auto& i : inps) ann.inps.push_back({i.name, ab.parse_word(i.path)});
  for (const auto& l : linears) {
    int e = ab.find(l.edge);
    if (e < 0) throw PreconditionError("linear annotation for undeclared edge '" + l.edge + "'");
    ann.linear_edges.push_back({e, l.axis, l.exponent});
  }
  for (const auto& x : exceptionals) {
    int e1 = ab.find(x.e1), e2 = ab.find(x.e2);
    if (e1 < 0 || e2 < 0)
      throw PreconditionError("exceptional family " + x.name + " references undeclared edges");
    ann.exceptionals.push_back({x.name, e1, e2, x.axis});
  }
  for (const auto& c : connectings) ann.connectings.push_back({c.name, ab.parse_word(c.path)});
  return TrainTrackSystem(std::move(g), std::move(edge_map), std::move(strata_ids), std::move(ann));
}

std::optional<FreeFactorSystem> SystemFile::free_factor_system(const Alphabet& ab) const {
  if (factors.empty()) return std::nullopt;
  std::vector<std::vector<int>> factor_ids;
  for (const auto& f : factors) {
    std::vector<int> ids;
    for (const auto& l : f.letters) ids.push_back(ab.find(l));
    factor_ids.push_back(std::move(ids));
  }
  return FreeFactorSystem(ab, std::move(factor_ids));
}

}  // namespace relcur
