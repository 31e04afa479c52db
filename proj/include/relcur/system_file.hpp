#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relcur/substitution.hpp"
#include "relcur/traintrack.hpp"
#include "relcur/words.hpp"

namespace relcur {

// Parsed system-definition file.  Line-based grammar, # comments:
//   kind: substitution | automorphism | graph
//   letters: a b c                     (rose kinds)
//   vertex v1 v2
//   edge e1 = v1 v2                    (graph kind)
//   rule x = <word>  |  map e1 = e5 ~e3 ~e5 e1 e4
//   factor A1 = a b
//   stratum H1 = c d                   (bottom-up; optional)
//   inp sigma = abAB
//   linear e1 axis sigma exp 1
//   exceptional x = e1 sigma e2
//   connecting t = <path>
struct SystemFile {
  enum class Kind { kSubstitution, kAutomorphism, kGraph };
  Kind kind = Kind::kSubstitution;

  std::vector<std::string> letters;  // rose kinds
  std::vector<std::string> vertices;
  struct GraphEdge {
    std::string name, from, to;
  };
  std::vector<GraphEdge> graph_edges;

  struct Rule {
    std::string letter;
    std::string image;  // verbatim word text
  };
  std::vector<Rule> rules;

  struct Factor {
    std::string name;
    std::vector<std::string> letters;
  };
  std::vector<Factor> factors;

  struct Stratum {
    std::string name;
    std::vector<std::string> edges;
  };
  std::vector<Stratum> strata;

  struct Inp {
    std::string name, path;
  };
  std::vector<Inp> inps;
  struct Linear {
    std::string edge, axis;
    int exponent = 0;
  };
  std::vector<Linear> linears;
  struct Exceptional {
    std::string name, e1, axis, e2;
  };
  std::vector<Exceptional> exceptionals;
  struct Connecting {
    std::string name, path;
  };
  std::vector<Connecting> connectings;

  // Derived objects.
  Alphabet alphabet() const;  // group / substitution letters (rose kinds)
  Substitution to_substitution() const;
  TrainTrackSystem to_traintrack() const;
  std::optional<FreeFactorSystem> free_factor_system(const Alphabet& alphabet) const;
};

// Throws PreconditionError with a line number on malformed input.
SystemFile parse_system(const std::string& text);
std::string serialize_system(const SystemFile& sf);

}  // namespace relcur
