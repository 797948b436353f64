#include "rflow/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "format_util.hpp"

namespace rflow {

namespace {

std::vector<int> labels_from_merges(const Dendrogram& tree, std::size_t merge_count) {
  const int n = static_cast<int>(tree.leaf_count());
  // Union-find over leaves; the merged cluster id maps to a representative leaf.
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  std::vector<int> rep(static_cast<std::size_t>(n) + tree.merges.size());
  std::iota(rep.begin(), rep.begin() + n, 0);
  for (std::size_t i = 0; i < merge_count; ++i) {
    const auto& m = tree.merges[i];
    const int ra = find(rep[static_cast<std::size_t>(m.a)]);
    const int rb = find(rep[static_cast<std::size_t>(m.b)]);
    const int root = std::min(ra, rb);
    parent[static_cast<std::size_t>(std::max(ra, rb))] = root;
    rep[static_cast<std::size_t>(n) + i] = root;
  }
  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  std::vector<int> by_root(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (int leaf = 0; leaf < n; ++leaf) {
    const int root = find(leaf);
    if (by_root[static_cast<std::size_t>(root)] < 0) by_root[static_cast<std::size_t>(root)] = next++;
    labels[static_cast<std::size_t>(leaf)] = by_root[static_cast<std::size_t>(root)];
  }
  return labels;
}

}  // namespace

std::vector<double> vectorize_rpp(const Rpp& rpp) {
  return {rpp.table().begin(), rpp.table().end()};
}

Dendrogram ward_cluster(std::span<const std::vector<double>> vectors,
                        std::vector<std::string> labels) {
  const std::size_t n = vectors.size();
  if (n < 2) throw std::invalid_argument("clustering needs at least two vectors");
  for (const auto& v : vectors) {
    if (v.size() != vectors[0].size()) throw std::invalid_argument("vectors differ in length");
  }
  if (labels.empty()) {
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  }
  if (labels.size() != n) throw std::invalid_argument("one label per vector required");

  // Squared Euclidean distances between active clusters, indexed by slot.
  std::vector<double> d2(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < vectors[i].size(); ++k) {
        const double diff = vectors[i][k] - vectors[j][k];
        s += diff * diff;
      }
      d2[i * n + j] = d2[j * n + i] = s;
    }
  }
  std::vector<int> id(n), size(n, 1);
  std::iota(id.begin(), id.end(), 0);
  std::vector<bool> active(n, true);

  Dendrogram tree;
  tree.labels = std::move(labels);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    std::pair<int, int> best_ids{std::numeric_limits<int>::max(), std::numeric_limits<int>::max()};
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        const double v = d2[i * n + j];
        const std::pair<int, int> ids{std::min(id[i], id[j]), std::max(id[i], id[j])};
        if (v < best || (v == best && ids < best_ids)) {
          best = v;
          best_ids = ids;
          bi = i;
          bj = j;
        }
      }
    }
    const int si = size[bi], sj = size[bj];
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const double sk = size[k];
      const double total = si + sj + sk;
      const double v = ((si + sk) * d2[bi * n + k] + (sj + sk) * d2[bj * n + k] - sk * best) / total;
      d2[bi * n + k] = d2[k * n + bi] = std::max(v, 0.0);
    }
    tree.merges.push_back({best_ids.first, best_ids.second, std::sqrt(best), si + sj});
    id[bi] = static_cast<int>(n + step);
    size[bi] = si + sj;
    active[bj] = false;
  }
  return tree;
}

std::vector<int> cut_tree(const Dendrogram& tree, int k) {
  const int n = static_cast<int>(tree.leaf_count());
  if (k < 1 || k > n) throw std::invalid_argument("cluster count must lie in [1, n]");
  return labels_from_merges(tree, static_cast<std::size_t>(n - k));
}

std::vector<int> cut_at_height(const Dendrogram& tree, double height) {
  if (height < 0.0) throw std::invalid_argument("cut height must be non-negative");
  std::size_t count = 0;
  while (count < tree.merges.size() && tree.merges[count].height <= height) ++count;
  return labels_from_merges(tree, count);
}

double half_height(const Dendrogram& tree) {
  return tree.merges.empty() ? 0.0 : 0.5 * tree.merges.back().height;
}

void write_clusters(std::ostream& out, const Dendrogram& tree, std::span<const int> labels) {
  if (labels.size() != tree.leaf_count()) throw std::invalid_argument("one label per leaf required");
  out << "station,cluster_label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << tree.labels[i] << ',' << labels[i] << '\n';
}

void write_dendrogram(std::ostream& out, const Dendrogram& tree) {
  out << "step,cluster_a,cluster_b,height,size\n";
  for (std::size_t i = 0; i < tree.merges.size(); ++i) {
    const auto& m = tree.merges[i];
    out << i << ',' << m.a << ',' << m.b << ',' << detail::format_number(m.height) << ',' << m.size
        << '\n';
  }
}

}  // namespace rflow
