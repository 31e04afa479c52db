#include "relcur/words.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace relcur {

Alphabet::Alphabet(std::vector<std::string> positive_letters, bool involutive)
    : names_(std::move(positive_letters)), involutive_(involutive) {
  compact_ = !names_.empty();
  for (int i = 0; i < static_cast<int>(names_.size()); ++i) {
    const std::string& n = names_[i];
    if (n.empty()) throw PreconditionError("alphabet: empty letter name");
    if (index_.count(n)) throw PreconditionError("alphabet: duplicate letter '" + n + "'");
    index_[n] = i;
    if (n.size() != 1 || !std::islower(static_cast<unsigned char>(n[0]))) compact_ = false;
  }
}

int Alphabet::find(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

Letter Alphabet::letter(const std::string& token) const {
  int i = find(token);
  if (i < 0) throw PreconditionError("unknown letter '" + token + "'");
  return static_cast<Letter>(i + 1);
}

std::string Alphabet::format_letter(Letter l) const {
  int i = letter_index(l);
  if (i < 0 || i >= size()) throw PreconditionError("letter out of range");
  if (l > 0) return names_[i];
  if (!involutive_) throw PreconditionError("inverse letter in a non-involutive alphabet");
  if (compact_) {
    std::string s = names_[i];
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
  }
  return "~" + names_[i];
}

std::string Alphabet::format_word(const Word& w) const {
  if (w.empty()) return "1";
  std::string out;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (!compact_ && j > 0) out += ' ';
    out += format_letter(w[j]);
  }
  return out;
}

Word Alphabet::parse_word(const std::string& text) const {
  Word w;
  if (text == "1" || text.empty()) return w;
  if (compact_) {
    for (char c : text) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      bool upper = std::isupper(static_cast<unsigned char>(c));
      std::string token(1, upper ? static_cast<char>(std::tolower(static_cast<unsigned char>(c))) : c);
      int i = find(token);
      if (i < 0) throw PreconditionError("unknown letter '" + std::string(1, c) + "'");
      if (upper && !involutive_)
        throw PreconditionError("inverse letter '" + std::string(1, c) + "' in a non-involutive alphabet");
      w.push_back(upper ? -(i + 1) : (i + 1));
    }
    return w;
  }
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    bool inv = token.size() > 1 && token[0] == '~';
    std::string base = inv ? token.substr(1) : token;
    int i = find(base);
    if (i < 0) throw PreconditionError("unknown letter '" + token + "'");
    if (inv && !involutive_)
      throw PreconditionError("inverse letter '" + token + "' in a non-involutive alphabet");
    w.push_back(inv ? -(i + 1) : (i + 1));
  }
  return w;
}

bool is_reduced(const Word& w) {
  for (std::size_t i = 1; i < w.size(); ++i)
    if (w[i] == inverse(w[i - 1])) return false;
  return true;
}

Word reduce(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (Letter l : w) {
    if (!out.empty() && out.back() == inverse(l)) {
      out.pop_back();
    } else {
      out.push_back(l);
    }
  }
  return out;
}

Word invert(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(inverse(*it));
  return out;
}

long long count_occurrences(const Word& pattern, const Word& text) {
  if (pattern.empty()) throw PreconditionError("count_occurrences: empty pattern");
  if (pattern.size() > text.size()) return 0;
  long long count = 0;
  const std::size_t m = pattern.size();
  for (std::size_t p = 0; p + m <= text.size(); ++p) {
    std::size_t j = 0;
    while (j < m && text[p + j] == pattern[j]) ++j;
    if (j == m) ++count;
  }
  return count;
}

bool is_cyclically_reduced(const Word& w) {
  if (!is_reduced(w)) return false;
  if (w.size() >= 2 && w.front() == inverse(w.back())) return false;
  return true;
}

namespace {

// Booth's least-rotation algorithm under letter_rank order.
std::size_t least_rotation(const Word& w) {
  const std::size_t n = w.size();
  if (n <= 1) return 0;
  std::vector<std::ptrdiff_t> f(2 * n, -1);
  std::size_t k = 0;
  for (std::size_t j = 1; j < 2 * n; ++j) {
    std::ptrdiff_t i = f[j - k - 1];
    int bj = letter_rank(w[j % n]);
    while (i != -1 && bj != letter_rank(w[(k + i + 1) % n])) {
      if (bj < letter_rank(w[(k + i + 1) % n])) k = j - i - 1;
      i = f[i];
    }
    if (i == -1 && bj != letter_rank(w[(k) % n])) {
      if (bj < letter_rank(w[k % n])) k = j;
      f[j - k] = -1;
    } else {
      f[j - k] = i + 1;
    }
  }
  return k % n;
}

}  // namespace

CyclicWord::CyclicWord(Word w) {
  if (w.empty()) throw PreconditionError("cyclic word: empty class");
  if (!is_cyclically_reduced(w))
    throw PreconditionError("cyclic word: input is not cyclically reduced");
  std::size_t r = least_rotation(w);
  letters_.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) letters_.push_back(w[(r + i) % w.size()]);
}

CyclicWord CyclicWord::inverse_class() const { return CyclicWord(invert(letters_)); }

bool CyclicWord::operator<(const CyclicWord& o) const {
  return std::lexicographical_compare(
      letters_.begin(), letters_.end(), o.letters_.begin(), o.letters_.end(),
      [](Letter a, Letter b) { return letter_rank(a) < letter_rank(b); });
}

CyclicReduction cyclic_reduce(const Word& w) {
  Word v = reduce(w);
  Word conj;
  while (v.size() >= 2 && v.front() == inverse(v.back())) {
    conj.push_back(v.front());
    v.erase(v.begin());
    v.pop_back();
  }
  if (v.empty()) throw PreconditionError("cyclic_reduce: trivial class");
  return {CyclicWord(std::move(v)), std::move(conj)};
}

namespace {

long long count_in_periodic(const Word& pattern, const Word& period) {
  const std::size_t n = period.size();
  const std::size_t m = pattern.size();
  long long count = 0;
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t j = 0;
    while (j < m && period[(p + j) % n] == pattern[j]) ++j;
    if (j == m) ++count;
  }
  return count;
}

}  // namespace

long long count_cyclic(const Word& pattern, const CyclicWord& alpha, bool with_inverse) {
  if (pattern.empty()) throw PreconditionError("count_cyclic: empty pattern");
  long long c = count_in_periodic(pattern, alpha.letters());
  if (with_inverse) c += count_in_periodic(pattern, invert(alpha.letters()));
  return c;
}

FreeFactorSystem::FreeFactorSystem(const Alphabet& alphabet, std::vector<std::vector<int>> factors)
    : alphabet_(&alphabet), factors_(std::move(factors)) {
  if (!alphabet.involutive())
    throw PreconditionError("free factor system requires an involutive alphabet");
  factor_of_.assign(alphabet.size(), -1);
  for (int f = 0; f < static_cast<int>(factors_.size()); ++f) {
    if (factors_[f].empty()) throw PreconditionError("free factor system: empty factor");
    for (int i : factors_[f]) {
      if (i < 0 || i >= alphabet.size())
        throw PreconditionError("free factor system: letter out of range");
      if (factor_of_[i] != -1)
        throw PreconditionError("free factor system: factors are not disjoint");
      factor_of_[i] = f;
    }
  }
  for (int i = 0; i < alphabet.size(); ++i)
    if (factor_of_[i] == -1) cofactor_.push_back(i);
}

std::optional<int> FreeFactorSystem::factor_of(const Word& w) const {
  if (w.empty()) return std::nullopt;
  int f = factor_of_[letter_index(w[0])];
  if (f < 0) return std::nullopt;
  for (Letter l : w)
    if (factor_of_[letter_index(l)] != f) return std::nullopt;
  return f;
}

bool FreeFactorSystem::in_f_minus_a(const Word& w) const {
  return !w.empty() && !factor_of(w).has_value();
}

std::vector<Word> FreeFactorSystem::b_a_set() const {
  std::vector<Word> out;
  for (int f = 0; f < num_factors(); ++f) {
    for (int g = 0; g < num_factors(); ++g) {
      if (f == g) continue;
      for (int i : factors_[f]) {
        for (int j : factors_[g]) {
          for (int si : {1, -1}) {
            for (int sj : {1, -1}) {
              out.push_back({static_cast<Letter>(si * (i + 1)), static_cast<Letter>(sj * (j + 1))});
            }
          }
        }
      }
    }
  }
  for (int i : cofactor_) out.push_back({static_cast<Letter>(i + 1)});
  return out;
}

}  // namespace relcur
