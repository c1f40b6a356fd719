#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gossip/network.hpp"
#include "gossip/params.hpp"
#include "gossip/rng.hpp"
#include "gossip/stats.hpp"

namespace gossip {

enum class EventKind { kSourceSelfUpdate, kSourceDelivery, kGossip };

inline const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kSourceSelfUpdate: return "source_self_update";
    case EventKind::kSourceDelivery: return "source_delivery";
    case EventKind::kGossip: return "gossip";
  }
  return "?";
}

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::kSourceSelfUpdate;
  int sender = -1;    // gossip only
  int receiver = -1;  // delivery and gossip
  bool honest = true; // meaningful for gossip; the source is always honest
};

// A monitored pool pair: stored packets of `green` pooled with corrupted
// copies from `orange`.
struct Probe {
  std::vector<int> green;
  std::vector<int> orange;
};

// Pools sized k and m over the first nodes; any choice is equivalent since
// node labels are exchangeable.
inline Probe default_probe(int k, int m) {
  Probe probe;
  for (int i = 0; i < k; ++i) probe.green.push_back(i);
  for (int i = 0; i < m; ++i) probe.orange.push_back(k + i);
  return probe;
}

inline void validate(const Probe& probe, int node_count) {
  auto check = [&](const std::vector<int>& pool) {
    for (int node : pool) {
      if (node < 0 || node >= node_count) {
        throw std::invalid_argument("probe node index out of range");
      }
    }
  };
  check(probe.green);
  check(probe.orange);
  if (probe.green.empty()) throw std::invalid_argument("probe green pool must be nonempty");
  for (int g : probe.green) {
    for (int o : probe.orange) {
      if (g == o) throw std::invalid_argument("probe pools must be disjoint");
    }
  }
}

struct ProbeSample {
  bool freshest_truth = false;  // some freshest pooled packet is accurate
  bool fresh_truth = false;     // some green node holds age-zero truth
  std::uint64_t min_age = 0;    // minimum version age over the green pool
};

inline ProbeSample probe_instantaneous(const NetworkState& state, const Probe& probe) {
  ProbeSample sample;
  sample.min_age = min_age_over(state, probe.green);
  sample.fresh_truth = sample.min_age == 0 && holds_fresh_truth(state, probe.green);
  const std::uint64_t orange_min = min_age_over(state, probe.orange);
  if (sample.min_age <= orange_min) {
    for (int node : probe.green) {
      const NodeState& s = state.nodes[static_cast<std::size_t>(node)];
      if (s.version_age == sample.min_age && s.truth) {
        sample.freshest_truth = true;
        break;
      }
    }
  }
  return sample;
}

struct SimConfig {
  NetworkParams params;
  double horizon = 5e5;
  double burn_in_fraction = 0.1;
  std::uint64_t seed = 0;
  int replications = 1;
  int batch_count = 20;
  std::vector<Probe> probes;
  // Called after every applied event with the post-event state. Used for
  // trajectory logs and trajectory-level tests; leave empty for speed.
  std::function<void(const Event&, const NetworkState&)> observer;
};

struct ProbeEstimate {
  double freshest_truth_mean = 0.0, freshest_truth_ci95 = 0.0;
  double fresh_truth_mean = 0.0, fresh_truth_ci95 = 0.0;
  double min_age_mean = 0.0, min_age_ci95 = 0.0;

  bool operator==(const ProbeEstimate&) const = default;
};

struct EstimateReport {
  double truth_fraction_mean = 0.0, truth_fraction_ci95 = 0.0;
  double age_mean = 0.0, age_ci95 = 0.0;  // version age of node 1
  std::vector<ProbeEstimate> probes;
  std::uint64_t event_count = 0;
  double elapsed_sim_time = 0.0;
  double burn_in_time = 0.0;

  bool operator==(const EstimateReport&) const = default;
};

// Discrete-event simulation of the network's continuous-time dynamics. The
// three random streams are seeded independently from the one user seed:
// inter-arrival times, event kind/endpoints, and honesty coins. The honesty
// stream is consumed only on gossip events, so two runs that differ only in
// mutation_prob see identical event times, endpoints and therefore identical
// age trajectories.
class Simulator {
 public:
  explicit Simulator(SimConfig config)
      : cfg_(std::move(config)),
        arrival_(derive_seed(cfg_.seed, 1)),
        select_(derive_seed(cfg_.seed, 2)),
        honesty_(derive_seed(cfg_.seed, 3)),
        total_rate_(cfg_.params.total_event_rate()) {
    validate(cfg_.params);
    if (!(cfg_.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(cfg_.burn_in_fraction >= 0.0 && cfg_.burn_in_fraction < 1.0)) {
      throw std::invalid_argument("burn_in_fraction must lie in [0, 1)");
    }
    if (cfg_.batch_count < 2) throw std::invalid_argument("batch_count must be >= 2");
    if (cfg_.replications < 1) throw std::invalid_argument("replications must be >= 1");
    for (const Probe& probe : cfg_.probes) validate(probe, cfg_.params.node_count);
  }

  // Draw the next event strictly after `now`. Exposed for distribution
  // tests; run() uses it as its only event source.
  Event next_event(double now) {
    if (!(total_rate_ > 0.0)) {
      throw std::domain_error("no event process has positive rate; the network never changes");
    }
    const NetworkParams& p = cfg_.params;
    Event ev;
    ev.time = now + arrival_.exponential(total_rate_);
    const double pick = select_.uniform01() * total_rate_;
    if (pick < p.source_update_rate) {
      ev.kind = EventKind::kSourceSelfUpdate;
    } else if (pick < p.source_update_rate + p.delivery_rate) {
      ev.kind = EventKind::kSourceDelivery;
      ev.receiver = static_cast<int>(select_.below(static_cast<std::uint64_t>(p.node_count)));
    } else {
      ev.kind = EventKind::kGossip;
      const auto n = static_cast<std::uint64_t>(p.node_count);
      const std::uint64_t pair = select_.below(n * (n - 1));
      ev.sender = static_cast<int>(pair / (n - 1));
      const int offset = static_cast<int>(pair % (n - 1));
      ev.receiver = offset >= ev.sender ? offset + 1 : offset;
      ev.honest = honesty_.bernoulli(1.0 - p.mutation_prob);
    }
    return ev;
  }

  // One trajectory from the all-fresh initial state, time-averaging every
  // tracked signal over the post-burn-in window.
  EstimateReport run() {
    const int n = cfg_.params.node_count;
    NetworkState state = NetworkState::fresh(n);
    int truth_count = n;

    const double burn_in = cfg_.burn_in_fraction * cfg_.horizon;
    TimeWeightedBatches truth_acc(burn_in, cfg_.horizon, cfg_.batch_count);
    TimeWeightedBatches age_acc(burn_in, cfg_.horizon, cfg_.batch_count);
    std::vector<std::vector<TimeWeightedBatches>> probe_acc;
    probe_acc.reserve(cfg_.probes.size());
    for (std::size_t i = 0; i < cfg_.probes.size(); ++i) {
      probe_acc.emplace_back(3, TimeWeightedBatches(burn_in, cfg_.horizon, cfg_.batch_count));
    }

    auto accumulate = [&](double from, double to) {
      if (!(from < to)) return;
      truth_acc.add(from, to, static_cast<double>(truth_count) / n);
      age_acc.add(from, to, static_cast<double>(state.nodes.front().version_age));
      for (std::size_t i = 0; i < cfg_.probes.size(); ++i) {
        const ProbeSample sample = probe_instantaneous(state, cfg_.probes[i]);
        probe_acc[i][0].add(from, to, sample.freshest_truth ? 1.0 : 0.0);
        probe_acc[i][1].add(from, to, sample.fresh_truth ? 1.0 : 0.0);
        probe_acc[i][2].add(from, to, static_cast<double>(sample.min_age));
      }
    };

    EstimateReport report;
    double now = 0.0;
    for (;;) {
      const Event ev = next_event(now);
      accumulate(now, std::min(ev.time, cfg_.horizon));
      if (ev.time >= cfg_.horizon) break;

      switch (ev.kind) {
        case EventKind::kSourceSelfUpdate:
          state = apply_source_update(std::move(state));
          break;
        case EventKind::kSourceDelivery: {
          truth_count += !state.nodes[static_cast<std::size_t>(ev.receiver)].truth;
          state = apply_source_delivery(std::move(state), ev.receiver);
          break;
        }
        case EventKind::kGossip: {
          const bool before = state.nodes[static_cast<std::size_t>(ev.receiver)].truth;
          state = apply_gossip(std::move(state), ev.sender, ev.receiver, ev.honest);
          truth_count +=
              static_cast<int>(state.nodes[static_cast<std::size_t>(ev.receiver)].truth) -
              static_cast<int>(before);
          break;
        }
      }
      ++report.event_count;
      now = ev.time;
      if (cfg_.observer) cfg_.observer(ev, state);
    }

    report.truth_fraction_mean = truth_acc.mean();
    report.truth_fraction_ci95 = truth_acc.ci95_halfwidth();
    report.age_mean = age_acc.mean();
    report.age_ci95 = age_acc.ci95_halfwidth();
    for (const auto& acc : probe_acc) {
      ProbeEstimate estimate;
      estimate.freshest_truth_mean = acc[0].mean();
      estimate.freshest_truth_ci95 = acc[0].ci95_halfwidth();
      estimate.fresh_truth_mean = acc[1].mean();
      estimate.fresh_truth_ci95 = acc[1].ci95_halfwidth();
      estimate.min_age_mean = acc[2].mean();
      estimate.min_age_ci95 = acc[2].ci95_halfwidth();
      report.probes.push_back(estimate);
    }
    report.elapsed_sim_time = cfg_.horizon;
    report.burn_in_time = burn_in;
    return report;
  }

 private:
  SimConfig cfg_;
  RngStream arrival_, select_, honesty_;
  double total_rate_;
};

// Runs `replications` independent trajectories (sub-seeded from the config
// seed) and merges them. A single replication is returned as-is; with more,
// point estimates are averaged and the confidence interval comes from the
// spread of the per-replication means.
inline EstimateReport simulate(const SimConfig& config) {
  if (config.replications <= 1) return Simulator(config).run();

  std::vector<EstimateReport> reps;
  reps.reserve(static_cast<std::size_t>(config.replications));
  for (int r = 0; r < config.replications; ++r) {
    SimConfig one = config;
    one.seed = derive_seed(config.seed, 0x100 + static_cast<std::uint64_t>(r));
    one.replications = 1;
    reps.push_back(Simulator(one).run());
  }

  const int count = config.replications;
  auto spread_ci = [count](const std::vector<double>& means) {
    double mean = 0.0;
    for (double v : means) mean += v;
    mean /= count;
    double ss = 0.0;
    for (double v : means) ss += (v - mean) * (v - mean);
    return t_quantile_975(count - 1) * std::sqrt(ss / (count - 1) / count);
  };
  auto collect = [&](auto&& get) {
    std::vector<double> means;
    means.reserve(reps.size());
    for (const auto& rep : reps) means.push_back(get(rep));
    return means;
  };

  EstimateReport merged;
  {
    auto means = collect([](const EstimateReport& r) { return r.truth_fraction_mean; });
    merged.truth_fraction_mean = std::accumulate(means.begin(), means.end(), 0.0) / count;
    merged.truth_fraction_ci95 = spread_ci(means);
  }
  {
    auto means = collect([](const EstimateReport& r) { return r.age_mean; });
    merged.age_mean = std::accumulate(means.begin(), means.end(), 0.0) / count;
    merged.age_ci95 = spread_ci(means);
  }
  merged.probes.resize(config.probes.size());
  for (std::size_t i = 0; i < config.probes.size(); ++i) {
    auto merge_one = [&](auto&& get, double& mean_out, double& ci_out) {
      std::vector<double> means;
      means.reserve(reps.size());
      for (const auto& rep : reps) means.push_back(get(rep.probes[i]));
      mean_out = std::accumulate(means.begin(), means.end(), 0.0) / count;
      ci_out = spread_ci(means);
    };
    merge_one([](const ProbeEstimate& p) { return p.freshest_truth_mean; },
              merged.probes[i].freshest_truth_mean, merged.probes[i].freshest_truth_ci95);
    merge_one([](const ProbeEstimate& p) { return p.fresh_truth_mean; },
              merged.probes[i].fresh_truth_mean, merged.probes[i].fresh_truth_ci95);
    merge_one([](const ProbeEstimate& p) { return p.min_age_mean; },
              merged.probes[i].min_age_mean, merged.probes[i].min_age_ci95);
  }
  for (const auto& rep : reps) {
    merged.event_count += rep.event_count;
    merged.elapsed_sim_time += rep.elapsed_sim_time;
    merged.burn_in_time += rep.burn_in_time;
  }
  return merged;
}

}  // namespace gossip
