#pragma once

#include <cstdint>
#include <random>

#include "sglasso/matrix.hpp"

namespace sglasso {

/// Engine type behind every random stream.
using Rng = std::mt19937_64;

/// Names a reproducible random stream. Replication r of a Monte Carlo run
/// uses stream_index r under one master seed, so replications can run in
/// any order and still see the same draws.
struct RngStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  Rng engine() const;
  RngStream substream(std::uint64_t index) const;

  friend bool operator==(const RngStream&, const RngStream&) = default;
};

/// Fills an n x p matrix with independent standard normals.
Matrix standard_normal_matrix(std::size_t n, std::size_t p, Rng& rng);

/// n rows drawn i.i.d. from N(0, cov). Throws NotPositiveDefinite.
Matrix sample_mvn(const Matrix& cov, std::size_t n, Rng& rng);
Matrix sample_mvn(const Matrix& cov, std::size_t n, const RngStream& stream);

}  // namespace sglasso
