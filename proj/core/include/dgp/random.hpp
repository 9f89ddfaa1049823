#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>

#include <Eigen/Core>

namespace dgp {

// SplitMix64 finalizer; used to spread seeds and derive substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic Gaussian/uniform source. One stream per logical thread of
// execution; derive(salt) yields substreams that are independent for all
// practical purposes, so ensembles can fan out over replicas and reproduce
// bit-identically regardless of scheduling.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed)
      : seed_(seed), gen_(splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  double gaussian() { return normal_(gen_); }
  double uniform() { return uniform_(gen_); }

  // Uniform integer in [0, n); n >= 1.
  std::uint64_t uniform_index(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
  }

  Eigen::VectorXd gaussian_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal_(gen_);
    return v;
  }

  RandomStream derive(std::uint64_t salt) const {
    return RandomStream(splitmix64(seed_ + 0x9e3779b97f4a7c15ULL * (salt + 1)));
  }

  // Full engine + distribution state, textual; for chain checkpoints.
  void save(std::ostream& os) const;
  void load(std::istream& is);

  bool operator==(const RandomStream& other) const {
    return seed_ == other.seed_ && gen_ == other.gen_;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

}  // namespace dgp
