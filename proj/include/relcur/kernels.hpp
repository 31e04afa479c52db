#pragma once

#include <vector>

#include "relcur/words.hpp"

namespace relcur {

// Batch pattern counting: counts[i] = occurrences of patterns[i] in text
// (overlapping).  The serial version is the reference; count_batch dispatches
// to the OpenMP kernel when compiled with OpenMP support.
std::vector<long long> count_batch_serial(const Word& text, const std::vector<Word>& patterns);
std::vector<long long> count_batch(const Word& text, const std::vector<Word>& patterns);

// Same for one period of a cyclic text (wrap-around matches included).
std::vector<long long> count_batch_cyclic_serial(const Word& period, const std::vector<Word>& patterns);
std::vector<long long> count_batch_cyclic(const Word& period, const std::vector<Word>& patterns);

bool kernels_have_openmp();

}  // namespace relcur
