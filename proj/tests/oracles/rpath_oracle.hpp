#pragma once

// Brute-force path validity from an explicit adjacency matrix, independent of
// the graph store's indexes.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace oracle {

struct EdgeSpec {
  std::string src;
  std::string dst;
  double confidence;
};

class AdjacencyMatrix {
 public:
  AdjacencyMatrix(const std::vector<std::string>& nodes, const std::vector<EdgeSpec>& edges,
                  double floor)
      : floor_(floor), best_(nodes.size(), std::vector<double>(nodes.size(), -1.0)) {
    for (std::size_t i = 0; i < nodes.size(); ++i) index_[nodes[i]] = i;
    for (const auto& e : edges) {
      auto a = index_.at(e.src), b = index_.at(e.dst);
      best_[a][b] = std::max(best_[a][b], e.confidence);
      best_[b][a] = std::max(best_[b][a], e.confidence);
    }
  }

  bool valid(const std::string& u, const std::string& v) const {
    auto a = index_.find(u), b = index_.find(v);
    if (a == index_.end() || b == index_.end()) return false;
    return best_[a->second][b->second] >= floor_;
  }

  double r_path(const std::vector<std::string>& declared) const {
    if (declared.size() < 2) return 0.0;
    int ok = 0;
    for (std::size_t i = 0; i + 1 < declared.size(); ++i) ok += valid(declared[i], declared[i + 1]);
    return static_cast<double>(ok) / static_cast<double>(declared.size() - 1);
  }

 private:
  double floor_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<double>> best_;
};

}  // namespace oracle
