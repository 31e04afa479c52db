#include "relcur/kernels.hpp"

#include <array>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace relcur {

namespace {

long long count_one(const Word& text, const Word& p) {
  if (p.empty() || p.size() > text.size()) return 0;
  const std::size_t m = p.size();
  const Letter first = p[0];
  long long count = 0;
  for (std::size_t i = 0; i + m <= text.size(); ++i) {
    if (text[i] != first) continue;
    std::size_t j = 1;
    while (j < m && text[i + j] == p[j]) ++j;
    if (j == m) ++count;
  }
  return count;
}

long long count_one_cyclic(const Word& period, const Word& p) {
  if (p.empty() || period.empty()) return 0;
  const std::size_t n = period.size();
  const std::size_t m = p.size();
  long long count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (period[i] != p[0]) continue;
    std::size_t j = 1;
    while (j < m && period[(i + j) % n] == p[j]) ++j;
    if (j == m) ++count;
  }
  return count;
}

// Letters present in the text; patterns using other letters cannot match.
std::array<bool, 4096> letter_mask(const Word& text) {
  std::array<bool, 4096> mask{};
  for (Letter l : text) {
    std::size_t k = static_cast<std::size_t>(letter_rank(l));
    if (k < mask.size()) mask[k] = true;
  }
  return mask;
}

bool pattern_possible(const std::array<bool, 4096>& mask, const Word& p) {
  for (Letter l : p) {
    std::size_t k = static_cast<std::size_t>(letter_rank(l));
    if (k < mask.size() && !mask[k]) return false;
  }
  return true;
}

}  // namespace

std::vector<long long> count_batch_serial(const Word& text, const std::vector<Word>& patterns) {
  auto mask = letter_mask(text);
  std::vector<long long> out(patterns.size(), 0);
  for (std::size_t i = 0; i < patterns.size(); ++i)
    if (pattern_possible(mask, patterns[i])) out[i] = count_one(text, patterns[i]);
  return out;
}

std::vector<long long> count_batch(const Word& text, const std::vector<Word>& patterns) {
#ifdef _OPENMP
  auto mask = letter_mask(text);
  std::vector<long long> out(patterns.size(), 0);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    if (pattern_possible(mask, patterns[i])) out[i] = count_one(text, patterns[i]);
  }
  return out;
#else
  return count_batch_serial(text, patterns);
#endif
}

std::vector<long long> count_batch_cyclic_serial(const Word& period, const std::vector<Word>& patterns) {
  auto mask = letter_mask(period);
  std::vector<long long> out(patterns.size(), 0);
  for (std::size_t i = 0; i < patterns.size(); ++i)
    if (pattern_possible(mask, patterns[i])) out[i] = count_one_cyclic(period, patterns[i]);
  return out;
}

std::vector<long long> count_batch_cyclic(const Word& period, const std::vector<Word>& patterns) {
#ifdef _OPENMP
  auto mask = letter_mask(period);
  std::vector<long long> out(patterns.size(), 0);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    if (pattern_possible(mask, patterns[i])) out[i] = count_one_cyclic(period, patterns[i]);
  }
  return out;
#else
  return count_batch_cyclic_serial(period, patterns);
#endif
}

bool kernels_have_openmp() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

}  // namespace relcur
