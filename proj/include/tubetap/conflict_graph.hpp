#pragma once

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <utility>
#include <vector>

#include "tubetap/errors.hpp"
#include "tubetap/market.hpp"

namespace tubetap {

/// Graph over tasks; an edge means the two tasks share at least one
/// interested device and therefore cannot run in the same time slot.
struct ConflictGraph {
  std::map<TaskId, std::set<TaskId>> adj;  // every vertex has a key

  void add_vertex(TaskId v) { adj.try_emplace(v); }

  void add_edge(TaskId a, TaskId b) {
    if (a == b) return;  // no self-loops
    add_vertex(a);
    add_vertex(b);
    adj[a].insert(b);
    adj[b].insert(a);
  }

  bool has_edge(TaskId a, TaskId b) const {
    const auto it = adj.find(a);
    return it != adj.end() && it->second.count(b) > 0;
  }

  std::size_t vertex_count() const { return adj.size(); }

  std::size_t edge_count() const {
    std::size_t deg_sum = 0;
    for (const auto& [v, nbrs] : adj) deg_sum += nbrs.size();
    return deg_sum / 2;
  }

  std::size_t max_degree() const {
    std::size_t best = 0;
    for (const auto& [v, nbrs] : adj) best = std::max(best, nbrs.size());
    return best;
  }
};

/// A proper coloring of the conflict graph with slots 1..kappa.
struct SlotAssignment {
  std::map<TaskId, int> slot_of;
  int kappa = 0;
};

inline ConflictGraph build_conflict_graph(const Scenario& scenario) {
  ConflictGraph g;
  for (const Task& t : scenario.tasks) g.add_vertex(t.id);
  for (const Device& d : scenario.devices) {
    for (std::size_t a = 0; a < d.interests.size(); ++a)
      for (std::size_t b = a + 1; b < d.interests.size(); ++b)
        g.add_edge(d.interests[a], d.interests[b]);
  }
  return g;
}

/// Smallest kappa for which allocate_time_slots is guaranteed to succeed.
inline int default_kappa(const ConflictGraph& graph) {
  return static_cast<int>(graph.max_degree()) + 1;
}

/// Two-phase slot allocation. Phase 1 repeatedly removes the lowest-id task
/// whose remaining degree is below kappa and pushes it on a stack; phase 2
/// pops the stack and gives each task the lowest slot not used by an
/// already-assigned neighbour. Succeeds exactly when the peeling completes.
inline SlotAssignment allocate_time_slots(const ConflictGraph& graph,
                                          int kappa) {
  if (kappa < 1) throw InvalidConfig("kappa must be >= 1");

  std::map<TaskId, std::set<TaskId>> live = graph.adj;
  std::vector<TaskId> stack;
  stack.reserve(live.size());

  while (!live.empty()) {
    // lowest-id task with fewer than kappa live neighbours
    auto pick = live.end();
    for (auto it = live.begin(); it != live.end(); ++it) {
      if (it->second.size() < static_cast<std::size_t>(kappa)) {
        pick = it;
        break;
      }
    }
    if (pick == live.end())
      throw GraphNotReducible(kappa, default_kappa(graph));
    const TaskId v = pick->first;
    for (TaskId nbr : pick->second) live[nbr].erase(v);
    live.erase(pick);
    stack.push_back(v);
  }

  SlotAssignment assignment;
  assignment.kappa = kappa;
  while (!stack.empty()) {
    const TaskId v = stack.back();
    stack.pop_back();
    std::set<int> taken;
    for (TaskId nbr : graph.adj.at(v)) {
      const auto it = assignment.slot_of.find(nbr);
      if (it != assignment.slot_of.end()) taken.insert(it->second);
    }
    int slot = 1;
    while (taken.count(slot) > 0) ++slot;
    assignment.slot_of[v] = slot;  // < kappa assigned neighbours, so slot <= kappa
  }
  return assignment;
}

/// True iff `assignment` covers every vertex, uses slots in 1..kappa, and
/// no edge is monochromatic.
inline bool verify_assignment(const ConflictGraph& graph,
                              const SlotAssignment& assignment) {
  for (const auto& [v, nbrs] : graph.adj) {
    const auto it = assignment.slot_of.find(v);
    if (it == assignment.slot_of.end()) return false;
    if (it->second < 1 || it->second > assignment.kappa) return false;
    for (TaskId nbr : nbrs) {
      const auto nit = assignment.slot_of.find(nbr);
      if (nit == assignment.slot_of.end()) return false;
      if (nit->second == it->second) return false;
    }
  }
  return true;
}

/// Edge-list export: header line, then one `i j` pair per line (i < j).
inline void write_edge_list(const ConflictGraph& graph, int kappa,
                            std::ostream& os) {
  os << "vertices=" << graph.vertex_count() << " kappa=" << kappa << "\n";
  for (const auto& [v, nbrs] : graph.adj)
    for (TaskId nbr : nbrs)
      if (v < nbr) os << v << " " << nbr << "\n";
}

}  // namespace tubetap
