#include "spdesim/ctmc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace spdesim::ctmc {

namespace {

// Strong connectivity of the directed graph with an edge i->j whenever
// rate(i,j) > 0: everything reachable from 0 forwards and backwards.
bool strongly_connected(const std::vector<double>& rates, int m) {
  auto reach = [&](bool transpose) {
    std::vector<char> seen(static_cast<std::size_t>(m), 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < m; ++v) {
        if (v == u || seen[v]) continue;
        const double r = transpose
                             ? rates[static_cast<std::size_t>(v) * m + u]
                             : rates[static_cast<std::size_t>(u) * m + v];
        if (r > 0.0) {
          seen[v] = 1;
          stack.push_back(v);
          ++count;
        }
      }
    }
    return count == m;
  };
  return reach(false) && reach(true);
}

}  // namespace

GeneratorMatrix GeneratorMatrix::validate(const std::vector<std::vector<double>>& raw) {
  const std::size_t m = raw.size();
  if (m == 0) fail(Errc::non_square, "generator must have at least one state");
  for (const auto& row : raw)
    if (row.size() != m)
      fail(Errc::non_square, "generator must be square: " + std::to_string(m) +
                                 " rows but a row of length " +
                                 std::to_string(row.size()));

  GeneratorMatrix g;
  g.m_ = static_cast<int>(m);
  g.rates_.assign(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double off_sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double r = raw[i][j];
      if (!std::isfinite(r))
        fail(Errc::domain_violation, "generator entry (" + std::to_string(i + 1) +
                                         "," + std::to_string(j + 1) +
                                         ") is not finite");
      if (i == j) continue;
      if (r < 0.0)
        fail(Errc::negative_off_diagonal,
             "negative off-diagonal rate " + std::to_string(r) + " at (" +
                 std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
      g.rates_[i * m + j] = r;
      off_sum += r;
    }
    g.rates_[i * m + i] = -off_sum;
  }

  if (m > 1 && !strongly_connected(g.rates_, g.m_))
    fail(Errc::reducible,
         "generator is reducible: states do not form a single communicating class");
  return g;
}

StationaryDistribution stationary_distribution(const GeneratorMatrix& g) {
  const int m = g.size();
  Eigen::MatrixXd gt(m, m);  // transpose, so the kernel of gt is pi
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) gt(j, i) = g.rate(i, j);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(gt);
  if (lu.rank() != m - 1)
    fail(Errc::singular_beyond_rank_one,
         "generator rank is " + std::to_string(lu.rank()) + ", expected " +
             std::to_string(m - 1) +
             "; the chain is numerically reducible");

  Eigen::VectorXd v = lu.kernel().col(0);
  const double total = v.sum();
  if (total == 0.0)
    fail(Errc::singular_beyond_rank_one, "kernel vector sums to zero");
  v /= total;

  StationaryDistribution d;
  d.pi.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    if (!(v(i) > 0.0))
      fail(Errc::singular_beyond_rank_one,
           "stationary solve produced a nonpositive component");
    d.pi[static_cast<std::size_t>(i)] = v(i);
  }
  return d;
}

int SwitchingPath::state_at(double t) const {
  // Right-continuous: the event at time s already applies at s itself.
  int state = initial_state;
  for (const Event& e : events) {
    if (e.time > t) break;
    state = e.state;
  }
  return state;
}

SwitchingPath sample_switching_path(const GeneratorMatrix& g, int r0, double T,
                                    rng::Stream& stream) {
  const int m = g.size();
  if (r0 < 0 || r0 >= m)
    fail(Errc::domain_violation,
         "initial state " + std::to_string(r0) + " outside 0.." + std::to_string(m - 1));
  if (!(T > 0.0)) fail(Errc::domain_violation, "horizon must be positive");

  SwitchingPath path;
  path.state_count = m;
  path.initial_state = r0;
  path.horizon = T;
  if (m == 1) return path;

  std::vector<double> weights(static_cast<std::size_t>(m - 1));
  int state = r0;
  double t = 0.0;
  for (;;) {
    t += stream.exponential(g.exit_rate(state));
    if (t >= T) break;
    std::size_t w = 0;
    for (int j = 0; j < m; ++j)
      if (j != state) weights[w++] = g.rate(state, j);
    std::size_t pick = stream.categorical(weights);
    const int next = static_cast<int>(pick) + (static_cast<int>(pick) >= state ? 1 : 0);
    path.events.push_back({t, next});
    state = next;
  }
  return path;
}

std::vector<double> occupation_fractions(const SwitchingPath& path) {
  const std::size_t m = static_cast<std::size_t>(path.state_count);
  std::vector<double> occ(m, 0.0);
  int state = path.initial_state;
  double prev = 0.0;
  for (const auto& e : path.events) {
    occ[static_cast<std::size_t>(state)] += e.time - prev;
    prev = e.time;
    state = e.state;
  }
  occ[static_cast<std::size_t>(state)] += path.horizon - prev;

  const double total = std::accumulate(occ.begin(), occ.end(), 0.0);
  for (double& x : occ) x /= total;

  // Pin the left-to-right sum to exactly 1: replace the last nonzero entry
  // with 1 minus the sum of its predecessors. Entries after it are exact
  // zeros, so re-summing reproduces the same partial sums and lands on 1.
  std::size_t last = m - 1;
  while (last > 0 && occ[last] == 0.0) --last;
  const double before = std::accumulate(occ.begin(), occ.begin() + static_cast<std::ptrdiff_t>(last), 0.0);
  occ[last] = std::max(0.0, 1.0 - before);
  return occ;
}

}  // namespace spdesim::ctmc
