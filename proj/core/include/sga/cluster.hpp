#pragma once

#include "sga/dimsel.hpp"
#include "sga/eigencore.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace sga
{

/// Assignment value for subjects flagged as outliers.
inline constexpr int kOutlier = -1;

/// One agglomeration step. Node ids follow the usual linkage convention:
/// leaves are 0..n-1, the i-th merge creates node n+i.
struct MergeRecord
{
    int left = 0;
    int right = 0;
    double cost = 0.0;  // increase in within-cluster sum of squares
    int size = 0;       // size of the merged cluster
};

struct ClusterModel
{
    Eigen::VectorXi assignment;            // 0..K-1, or kOutlier
    int n_clusters = 0;                    // surviving clusters
    std::vector<MergeRecord> merge_tree;   // all n-1 merges
    int embedding_dim = 0;
    std::vector<int> cut_nodes;            // dendrogram node per cut-level cluster
    std::vector<std::string> cut_labels;   // "C0".. for kept, "X0".. for outlier clusters

    int n_subjects() const { return static_cast<int>(assignment.size()); }
    int n_cut_clusters() const { return static_cast<int>(cut_nodes.size()); }
};

/// Ward agglomerative clustering on embedding coordinates.
///
/// With explicit k the dendrogram is cut at k clusters. With k = nullopt the
/// cut is the smallest K at which every cluster passes homogeneity_test;
/// clusters smaller than 2 * min_cluster_size are accepted without testing,
/// and auto mode needs the panel SNP count p for the eigengap threshold.
/// Clusters smaller than min_cluster_size are flagged OUTLIER.
ClusterModel ward_cluster(const Embedding& e, std::optional<int> k, int min_cluster_size = 5,
                          int p = 0,
                          const ThresholdModel& model = ThresholdModel::builtin_default());

/// True iff the subset shows no ancestry structure: rebuild the spectral
/// weights/Laplacian/spectrum from the given embedding rows and check that
/// the eigengap rule selects d = 1. p is the SNP count of the originating
/// panel (the threshold depends on it).
bool homogeneity_test(const Eigen::MatrixXd& coords, int p,
                      const ThresholdModel& model = ThresholdModel::builtin_default());

/// Cluster-level Newick export: leaves are the cut-level clusters (labelled
/// as in cut_labels), internal nodes the merges above the cut, node heights
/// the Ward merge costs.
std::string dendrogram_export(const ClusterModel& c);

/// Parsed dendrogram node; leaf iff left < 0. Nodes are stored children
/// before parents with the root last.
struct DendrogramNode
{
    int left = -1;
    int right = -1;
    double height = 0.0;
    std::string label;
};

std::vector<DendrogramNode> parse_dendrogram(const std::string& newick);

}  // namespace sga
