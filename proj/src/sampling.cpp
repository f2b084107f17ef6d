#include "eqot/sampling.hpp"

namespace eqot {

Measure random_measure(Rng& rng, Index n, double sparsity) {
  std::exponential_distribution<double> weight(1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Vector w(n);
  for (Index i = 0; i < n; ++i) w(i) = weight(rng);
  for (Index i = 0; i < n; ++i)
    if (coin(rng) < sparsity) w(i) = 0.0;
  if (w.sum() == 0.0) w(std::uniform_int_distribution<Index>(0, n - 1)(rng)) = 1.0;
  return Measure::normalized(w);
}

Vector random_vector(Rng& rng, Index n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

MarkovChain random_invariant_chain(Rng& rng, const QuotientSpace& q) {
  const Index n = q.base().size();
  Matrix raw(n, n);
  for (Index x = 0; x < n; ++x) raw.row(x) = random_measure(rng, n, 0.3).weights().transpose();
  const auto& group = q.action().group();
  Matrix k = Matrix::Zero(n, n);
  for (std::size_t g = 0; g < group.order(); ++g)
    for (Index x = 0; x < n; ++x)
      for (Index y = 0; y < n; ++y) k(x, y) += raw(group.apply(g, x), group.apply(g, y));
  k /= static_cast<double>(group.order());
  for (Index x = 0; x < n; ++x) k.row(x) /= k.row(x).sum();
  return MarkovChain(q.base(), std::move(k));
}

Vector random_density(Rng& rng, const Vector& pi, double spread) {
  std::uniform_real_distribution<double> u(1.0, spread);
  Vector rho(pi.size());
  for (Index i = 0; i < static_cast<Index>(pi.size()); ++i) rho(i) = u(rng);
  return rho / rho.dot(pi);
}

}  // namespace eqot
