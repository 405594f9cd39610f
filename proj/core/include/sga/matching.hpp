#pragma once

#include "sga/cluster.hpp"
#include "sga/eigencore.hpp"

#include <Eigen/Dense>

#include <vector>

namespace sga
{

struct MatchedStrata
{
    std::vector<std::vector<int>> strata;  // subject indices, disjoint
    std::vector<int> case_count;           // per stratum
    std::vector<int> control_count;        // per stratum
    std::vector<int> removed;              // unmatchable subjects (caller's indexing)
    double total_distance = 0.0;           // sum of within-stratum pairwise distances

    int n_strata() const { return static_cast<int>(strata.size()); }
};

struct UnmatchableReport
{
    std::vector<int> retained;  // ascending subject indices
    std::vector<int> removed;   // ascending subject indices
};

/// Drops OUTLIER-flagged subjects, then any subject whose nearest
/// cross-phenotype embedding distance exceeds the 99th percentile
/// (nearest-rank) of those distances. Errors if no case or no control
/// survives.
UnmatchableReport remove_unmatchable(const ClusterModel& c, const Eigen::VectorXi& phenotype,
                                     const Embedding& e);

/// Greedy full matching. Pass 1 walks all case-control pairs by increasing
/// embedding distance and unions the two components unless both already
/// hold a case and a control or the merge would exceed max_stratum_size;
/// pass 2 attaches every leftover subject to its nearest stratum (single
/// linkage), preferring strata below max_stratum_size. Every stratum keeps
/// at least one case and one control.
MatchedStrata match_strata(const Embedding& e, const Eigen::VectorXi& phenotype,
                           int max_stratum_size = 20);

}  // namespace sga
