#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rflow/rpp.hpp"

namespace rflow {

// Row-major flattening of the full W x H table.
std::vector<double> vectorize_rpp(const Rpp& rpp);

struct Merge {
  int a = 0;           // cluster ids: leaves are 0..n-1, merge i creates n+i
  int b = 0;
  double height = 0.0;
  int size = 0;
};

struct Dendrogram {
  std::vector<std::string> labels;
  std::vector<Merge> merges;

  std::size_t leaf_count() const { return labels.size(); }
};

// Ward linkage on Euclidean distance with the Lance-Williams update. Heights
// follow the usual convention sqrt(2 * increase in within-cluster sum of
// squares). Ties go to the lowest (a, b) id pair.
Dendrogram ward_cluster(std::span<const std::vector<double>> vectors,
                        std::vector<std::string> labels = {});

// Cluster label per leaf after undoing the last k-1 merges. Labels number
// clusters 0.. in order of their lowest leaf index.
std::vector<int> cut_tree(const Dendrogram& tree, int k);
// Keeps only merges with height <= `height`.
std::vector<int> cut_at_height(const Dendrogram& tree, double height);
// Half of the final merge height.
double half_height(const Dendrogram& tree);

void write_clusters(std::ostream& out, const Dendrogram& tree, std::span<const int> labels);
// Rows of `step,cluster_a,cluster_b,height,size`.
void write_dendrogram(std::ostream& out, const Dendrogram& tree);

}  // namespace rflow
