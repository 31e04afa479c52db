#include <doctest.h>

#include <random>

#include "relcur/kernels.hpp"

using namespace relcur;

TEST_CASE("parallel batch counting matches the serial reference") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> letter(1, 6);
  std::uniform_int_distribution<int> sign(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    Word text(1000 + trial * 517);
    for (auto& l : text) l = sign(rng) ? letter(rng) : -letter(rng);
    std::vector<Word> patterns;
    std::uniform_int_distribution<int> plen(1, 5);
    for (int i = 0; i < 60; ++i) {
      Word p(plen(rng));
      for (auto& l : p) l = sign(rng) ? letter(rng) : -letter(rng);
      patterns.push_back(p);
    }
    CHECK(count_batch(text, patterns) == count_batch_serial(text, patterns));
    CHECK(count_batch_cyclic(text, patterns) == count_batch_cyclic_serial(text, patterns));
  }
}

TEST_CASE("batch counts agree with count_occurrences") {
  Word text{1, 2, 1, 2, -1, 1, 2};
  std::vector<Word> patterns{{1, 2}, {2}, {-1}, {2, 1}};
  auto counts = count_batch_serial(text, patterns);
  for (std::size_t i = 0; i < patterns.size(); ++i)
    CHECK(counts[i] == count_occurrences(patterns[i], text));
}
