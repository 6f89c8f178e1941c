// Prints the closed-form quantities for one large-cluster configuration and a
// small posterior table, as a quick orientation to the theory module.

#include <cstdio>
#include <cstdint>

#include "localpop/localpop.hpp"

int main() {
  using namespace localpop;

  const std::int64_t n = 4096, k = 16, r = 256;
  const double p = 0.1;
  const double eps = derive_erasure(ScalingRegime(0.25, 2.0), n);
  const double delta = separation_delta(eps, p);

  std::printf("n=%lld k=%lld epsilon=%.6f\n", static_cast<long long>(n),
              static_cast<long long>(k), eps);
  std::printf("p_good=%.6g p_bad=%.6g separation delta=%.4f\n", p_good(eps, p), p_bad(eps),
              delta);

  BoundReport p1 = chernoff_good(n, k, eps, p, delta);
  BoundReport p2 = chernoff_bad(n, k, r, eps, delta);
  std::printf("p1: value=%.4g log=%.4f vacuous=%d\n", p1.value, p1.log_value, p1.vacuous);
  std::printf("p2: value=%.4g log=%.4f vacuous=%d\n", p2.value, p2.log_value, p2.vacuous);

  double gamma = gamma_at(0.45, 5, 2000);
  std::printf("small-cluster bound at (p=0.3, gamma=%.4f): %.6f\n", gamma,
              theorem1_lower_bound(0.3, gamma));

  std::puts("posterior error of a (ones, zeros) vote at p=0.1:");
  for (int ones = 0; ones <= 3; ++ones) {
    for (int zeros = 0; zeros <= 3; ++zeros)
      std::printf("  %5.3f", posterior_error(ones, zeros, 0.1));
    std::puts("");
  }

  ColumnMoments m = column_ones_moments(k, eps, p);
  std::printf("truth-1 column ones: mu=%.3f sigma=%.3f\n", m.mu, m.sigma);
  return 0;
}
