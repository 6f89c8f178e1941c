// Runs the large-cluster ladder at reduced trial counts and prints the sweep
// CSV, then contrasts the first point against the matching theory bounds.

#include <cstdio>
#include <cstdint>

#include "localpop/localpop.hpp"

int main() {
  using namespace localpop;

  auto mk = [](std::int64_t k, std::int64_t r) {
    GridEntry e;
    e.k = k;
    e.r = r;
    e.alpha = 0.25;
    e.c = 2.0;
    e.p = 0.1;
    e.t_rule = TRule::EqualsK();
    return e;
  };
  const std::uint64_t master = 7;
  auto points = sweep({mk(8, 64), mk(12, 128), mk(16, 256)}, 200, Seed{master, 0});
  std::fputs(sweep_csv(points, master).c_str(), stdout);

  const SweepPoint& pt = points[0];
  double delta = separation_delta(pt.epsilon, pt.p);
  BoundReport p1 = chernoff_good(pt.n, pt.k, pt.epsilon, pt.p, delta);
  BoundReport p2 = chernoff_bad(pt.n, pt.k, pt.r, pt.epsilon, delta);
  std::printf("# first point: ber=%.4f purity_all_good=%.3f\n", pt.stats.est.ber,
              pt.stats.purity_all_good);
  std::printf("# step-1 failure bound p1+p2=%.4g (vacuous: %s)\n", p1.value + p2.value,
              p1.vacuous || p2.vacuous ? "yes" : "no");
  return 0;
}
