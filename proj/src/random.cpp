#include "sglasso/random.hpp"

#include "sglasso/linalg.hpp"

namespace sglasso {

Rng RngStream::engine() const {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(master_seed), hi(master_seed), lo(stream_index), hi(stream_index),
                    0x5eedu};
  return Rng(seq);
}

RngStream RngStream::substream(std::uint64_t index) const {
  // Mix the parent index into the seed so nested streams never collide
  // with top-level ones.
  std::uint64_t z = master_seed ^ (stream_index + 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return {z, index};
}

Matrix standard_normal_matrix(std::size_t n, std::size_t p, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(n, p);
  for (double& v : z.values()) v = normal(rng);
  return z;
}

Matrix sample_mvn(const Matrix& cov, std::size_t n, Rng& rng) {
  const auto l = cholesky(cov);
  if (!l) throw NotPositiveDefinite("sample_mvn: covariance is not positive definite");
  const std::size_t p = cov.rows();
  const Matrix z = standard_normal_matrix(n, p, rng);
  Matrix x(n, p);
  for (std::size_t t = 0; t < n; ++t) {
    auto zt = z.row(t);
    auto xt = x.row(t);
    for (std::size_t i = 0; i < p; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k <= i; ++k) s += (*l)(i, k) * zt[k];
      xt[i] = s;
    }
  }
  return x;
}

Matrix sample_mvn(const Matrix& cov, std::size_t n, const RngStream& stream) {
  Rng rng = stream.engine();
  return sample_mvn(cov, n, rng);
}

}  // namespace sglasso
