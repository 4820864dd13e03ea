#include "ccrecon/cascade_sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>
#include <string>
#include <utility>

#include "ccrecon/errors.hpp"

namespace ccrecon {

namespace {

bool arrival_less(const Arrival& a, const Arrival& b) {
  return a.time_ms < b.time_ms || (a.time_ms == b.time_ms && a.node < b.node);
}

void check_fraction(double f) {
  if (!(f >= 0.0 && f < 1.0)) throw DomainError("hidden fraction must lie in [0, 1)");
}

// Partial Fisher-Yates: the first k entries become a uniform k-subset.
template <typename T>
void shuffle_prefix(std::vector<T>& items, std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k && i + 1 < items.size(); ++i) {
    const std::size_t j = i + uniform_index(rng, items.size() - i);
    std::swap(items[i], items[j]);
  }
}

}  // namespace

std::size_t CascadeTrace::reached_count() const {
  return static_cast<std::size_t>(std::count_if(first_receipt.begin(), first_receipt.end(),
                                                [](double t) { return t != kNeverReceived; }));
}

void validate(const Observation& obs) {
  for (std::size_t k = 1; k < obs.arrivals.size(); ++k)
    if (obs.arrivals[k].time_ms < obs.arrivals[k - 1].time_ms)
      throw DomainError("observation " + std::to_string(obs.cascade_id) + " is not sorted by time");
  std::vector<NodeId> nodes;
  nodes.reserve(obs.arrivals.size());
  for (const auto& a : obs.arrivals) {
    if (!std::isfinite(a.time_ms))
      throw DomainError("observation " + std::to_string(obs.cascade_id) + " has a non-finite time");
    nodes.push_back(a.node);
  }
  std::sort(nodes.begin(), nodes.end());
  if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end())
    throw DomainError("observation " + std::to_string(obs.cascade_id) + " repeats a node");
}

void canonicalize(Observation& obs) {
  std::sort(obs.arrivals.begin(), obs.arrivals.end(), arrival_less);
}

CascadeTrace propagate(const Topology& topology, NodeId root, CascadeId cascade_id) {
  if (root >= topology.node_count()) throw DomainError("cascade root outside 0..N-1");
  CascadeTrace trace{cascade_id, root, std::vector<double>(topology.node_count(), kNeverReceived)};
  using Entry = std::pair<double, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  trace.first_receipt[root] = 0.0;
  queue.emplace(0.0, root);
  while (!queue.empty()) {
    const auto [t, v] = queue.top();
    queue.pop();
    if (t > trace.first_receipt[v]) continue;
    for (const auto& nb : topology.neighbors(v)) {
      const double arrival = t + nb.delay_ms;
      if (arrival < trace.first_receipt[nb.node]) {
        trace.first_receipt[nb.node] = arrival;
        queue.emplace(arrival, nb.node);
      }
    }
  }
  return trace;
}

Observation observe(const CascadeTrace& trace, const ObservationModel& model, std::uint64_t seed) {
  check_fraction(model.hidden_fraction);
  if (model.observer_delay) validate(*model.observer_delay);
  Rng rng(seed);
  Observation obs{trace.cascade_id, {}};
  obs.arrivals.reserve(trace.first_receipt.size());
  for (NodeId v = 0; v < trace.first_receipt.size(); ++v) {
    if (!trace.reached(v)) continue;
    const double offset = model.observer_delay ? sample_delay(*model.observer_delay, rng) : 0.0;
    obs.arrivals.push_back(Arrival{v, trace.first_receipt[v] + offset});
  }
  const auto hide = static_cast<std::size_t>(
      std::floor(model.hidden_fraction * static_cast<double>(obs.arrivals.size())));
  if (hide > 0) {
    shuffle_prefix(obs.arrivals, hide, rng);
    obs.arrivals.erase(obs.arrivals.begin(), obs.arrivals.begin() + static_cast<std::ptrdiff_t>(hide));
  }
  canonicalize(obs);
  return obs;
}

Observation observe_excluding(const CascadeTrace& trace, const std::optional<DelaySpec>& observer_delay,
                              const std::vector<bool>& hidden, std::uint64_t seed) {
  if (hidden.size() != trace.first_receipt.size())
    throw DomainError("hidden-node mask size differs from node count");
  if (observer_delay) validate(*observer_delay);
  Rng rng(seed);
  Observation obs{trace.cascade_id, {}};
  for (NodeId v = 0; v < trace.first_receipt.size(); ++v) {
    if (!trace.reached(v)) continue;
    // Draw for hidden nodes too so the offsets of visible nodes do not depend on the mask.
    const double offset = observer_delay ? sample_delay(*observer_delay, rng) : 0.0;
    if (!hidden[v]) obs.arrivals.push_back(Arrival{v, trace.first_receipt[v] + offset});
  }
  canonicalize(obs);
  return obs;
}

std::vector<bool> choose_hidden_nodes(std::size_t n, double fraction, std::uint64_t seed) {
  check_fraction(fraction);
  std::vector<NodeId> nodes(n);
  std::iota(nodes.begin(), nodes.end(), NodeId{0});
  const auto hide = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  Rng rng(seed);
  shuffle_prefix(nodes, hide, rng);
  std::vector<bool> mask(n, false);
  for (std::size_t i = 0; i < hide; ++i) mask[nodes[i]] = true;
  return mask;
}

std::vector<NodeId> choose_roots(std::size_t n, std::size_t count, std::uint64_t seed) {
  if (count > n)
    throw DomainError("cannot choose " + std::to_string(count) + " distinct roots from " +
                      std::to_string(n) + " nodes");
  std::vector<NodeId> nodes(n);
  std::iota(nodes.begin(), nodes.end(), NodeId{0});
  Rng rng(seed);
  shuffle_prefix(nodes, count, rng);
  nodes.resize(count);
  return nodes;
}

}  // namespace ccrecon
