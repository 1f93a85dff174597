#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace revpref {

std::uint64_t splitmix64(std::uint64_t x);

// xoshiro256** seeded through splitmix64. Cheap to construct, so per-sample
// streams (common random numbers) cost nothing noticeable.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0x853c49e6748fea9bULL);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();

  bool operator==(const Rng&) const = default;

 private:
  std::uint64_t s_[4];
};

// Independent stream seed for (master, index, stage). Distinct stage tags never
// share a stream for the same master/index pair.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::string_view stage);

double uniform01(Rng& rng);

std::vector<double> uniform_on_sphere(std::size_t n, Rng& rng);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

// Divides by the 2-norm in place. Returns false (and leaves v untouched) if the norm is 0.
bool normalize(std::span<double> v);

}  // namespace revpref
