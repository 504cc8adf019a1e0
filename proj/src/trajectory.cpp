#include "anchored/trajectory.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace anchored {

std::vector<long> log_grid(long horizon) {
  if (horizon < 0) throw std::invalid_argument("log_grid: negative horizon");
  std::set<long> grid;
  const long dense = std::min(horizon, 1000L);
  for (long n = 0; n <= dense; ++n) grid.insert(n);
  double g = 1000.0;
  while (g <= static_cast<double>(horizon)) {
    g *= 1.1;
    const long v = static_cast<long>(g);
    if (v > horizon) break;
    grid.insert(v);
    grid.insert(std::min(horizon, v + 1));
  }
  for (long p = 1; p > 0 && p <= horizon; p <<= 1) {
    grid.insert(p);
    if (p + 1 <= horizon) grid.insert(p + 1);
  }
  grid.insert(horizon);
  return std::vector<long>(grid.begin(), grid.end());
}

}  // namespace anchored
