// Compares the serial and OpenMP batch-counting kernels on synthetic data of
// the size the iteration experiments produce.

#include <chrono>
#include <cstdio>
#include <random>

#include "relcur/kernels.hpp"

using namespace relcur;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t text_len = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 2'000'000;
  int n_patterns = argc > 2 ? std::atoi(argv[2]) : 600;
  int reps = argc > 3 ? std::atoi(argv[3]) : 3;

  std::mt19937 rng(1);
  std::uniform_int_distribution<int> letter(1, 8);
  Word text(text_len);
  for (auto& l : text) l = letter(rng) <= 4 ? letter(rng) : -letter(rng);
  std::vector<Word> patterns;
  std::uniform_int_distribution<int> plen(1, 4);
  for (int i = 0; i < n_patterns; ++i) {
    Word p(plen(rng));
    for (auto& l : p) l = letter(rng) <= 4 ? letter(rng) : -letter(rng);
    patterns.push_back(p);
  }

  std::printf("text=%zu patterns=%d reps=%d openmp=%s\n", text_len, n_patterns, reps,
              kernels_have_openmp() ? "yes" : "no");

  long long checksum_serial = 0, checksum_parallel = 0;
  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) {
    auto c = count_batch_serial(text, patterns);
    for (long long v : c) checksum_serial += v;
  }
  double serial = seconds_since(t0) / reps;

  t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) {
    auto c = count_batch(text, patterns);
    for (long long v : c) checksum_parallel += v;
  }
  double parallel = seconds_since(t0) / reps;

  std::printf("serial   %.3f s/rep\n", serial);
  std::printf("parallel %.3f s/rep  (speedup %.2fx)\n", parallel, serial / parallel);
  if (checksum_serial != checksum_parallel) {
    std::printf("MISMATCH: checksums differ\n");
    return 1;
  }
  std::printf("checksums agree (%lld)\n", checksum_serial / reps);
  return 0;
}
