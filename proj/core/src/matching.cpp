#include "sga/matching.hpp"

#include "sga/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <vector>

namespace sga
{

namespace
{

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& coords)
{
    const Eigen::Index n = coords.rows();
    Eigen::MatrixXd d(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        d(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j)
        {
            const double v = (coords.row(i) - coords.row(j)).norm();
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

void check_phenotype(const Eigen::VectorXi& phenotype, Eigen::Index n)
{
    if (phenotype.size() != n)
        throw ValidationError("phenotype length does not match the number of subjects");
    for (Eigen::Index i = 0; i < n; ++i)
        if (phenotype(i) != 0 && phenotype(i) != 1)
            throw ValidationError("matching requires a complete 0/1 phenotype");
}

}  // namespace

UnmatchableReport remove_unmatchable(const ClusterModel& c, const Eigen::VectorXi& phenotype,
                                     const Embedding& e)
{
    const Eigen::Index n = e.coords.rows();
    if (c.assignment.size() != n)
        throw ValidationError("cluster model and embedding disagree on the number of subjects");
    check_phenotype(phenotype, n);

    UnmatchableReport report;
    std::vector<int> candidates;
    for (Eigen::Index i = 0; i < n; ++i)
    {
        if (c.assignment(i) == kOutlier)
            report.removed.push_back(static_cast<int>(i));
        else
            candidates.push_back(static_cast<int>(i));
    }

    long cases = 0;
    long controls = 0;
    for (int i : candidates)
        (phenotype(i) == 1 ? cases : controls)++;
    if (cases == 0 || controls == 0)
        throw ValidationError("unmatchable removal left no " +
                              std::string(cases == 0 ? "cases" : "controls"));

    std::vector<double> nearest(candidates.size(), std::numeric_limits<double>::infinity());
    for (std::size_t a = 0; a < candidates.size(); ++a)
    {
        for (std::size_t b = 0; b < candidates.size(); ++b)
        {
            if (phenotype(candidates[a]) == phenotype(candidates[b]))
                continue;
            const double d = (e.coords.row(candidates[a]) - e.coords.row(candidates[b])).norm();
            nearest[a] = std::min(nearest[a], d);
        }
    }

    std::vector<double> sorted = nearest;
    std::sort(sorted.begin(), sorted.end());
    const auto m = static_cast<long>(sorted.size());
    long rank = static_cast<long>(std::ceil(0.99 * static_cast<double>(m)));
    rank = std::max(1L, std::min(rank, m));
    const double threshold = sorted[static_cast<std::size_t>(rank - 1)];

    long kept_cases = 0;
    long kept_controls = 0;
    for (std::size_t a = 0; a < candidates.size(); ++a)
    {
        if (nearest[a] > threshold)
        {
            report.removed.push_back(candidates[a]);
        }
        else
        {
            report.retained.push_back(candidates[a]);
            (phenotype(candidates[a]) == 1 ? kept_cases : kept_controls)++;
        }
    }
    std::sort(report.removed.begin(), report.removed.end());
    if (kept_cases == 0 || kept_controls == 0)
        throw ValidationError("unmatchable removal left no " +
                              std::string(kept_cases == 0 ? "cases" : "controls"));
    return report;
}

MatchedStrata match_strata(const Embedding& e, const Eigen::VectorXi& phenotype,
                           int max_stratum_size)
{
    const Eigen::Index n = e.coords.rows();
    check_phenotype(phenotype, n);
    if (max_stratum_size < 2)
        throw ValidationError("max_stratum_size must be >= 2");

    std::vector<int> cases;
    std::vector<int> controls;
    for (Eigen::Index i = 0; i < n; ++i)
        (phenotype(i) == 1 ? cases : controls).push_back(static_cast<int>(i));
    if (cases.empty() || controls.empty())
        throw ValidationError("matching needs at least one case and one control");

    const Eigen::MatrixXd dist = pairwise_distances(e.coords);

    std::vector<std::tuple<double, int, int>> pairs;
    pairs.reserve(cases.size() * controls.size());
    for (int a : cases)
        for (int b : controls)
            pairs.emplace_back(dist(a, b), std::min(a, b), std::max(a, b));
    std::sort(pairs.begin(), pairs.end());

    // Greedy full matching by union-find over case-control pairs in distance
    // order. A link fires only while one side still lacks a case or a
    // control, so strata stop growing once the 1-case/1-control constraint
    // holds on both sides. Every union joins a case-bearing component with a
    // control-bearing one, so any multi-member component is a valid stratum;
    // the only leftovers are singletons starved by the size cap.
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::vector<int> comp_size(static_cast<std::size_t>(n), 1);
    std::vector<int> comp_cases(static_cast<std::size_t>(n));
    std::vector<int> comp_controls(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
    {
        parent[static_cast<std::size_t>(i)] = static_cast<int>(i);
        comp_cases[static_cast<std::size_t>(i)] = phenotype(i) == 1 ? 1 : 0;
        comp_controls[static_cast<std::size_t>(i)] = phenotype(i) == 1 ? 0 : 1;
    }
    const auto find = [&](int v) {
        while (parent[static_cast<std::size_t>(v)] != v)
        {
            parent[static_cast<std::size_t>(v)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
            v = parent[static_cast<std::size_t>(v)];
        }
        return v;
    };
    for (const auto& [d, a, b] : pairs)
    {
        (void)d;
        const int ra = find(a);
        const int rb = find(b);
        if (ra == rb)
            continue;
        const bool va = comp_cases[static_cast<std::size_t>(ra)] > 0 &&
                        comp_controls[static_cast<std::size_t>(ra)] > 0;
        const bool vb = comp_cases[static_cast<std::size_t>(rb)] > 0 &&
                        comp_controls[static_cast<std::size_t>(rb)] > 0;
        if (va && vb)
            continue;
        if (comp_size[static_cast<std::size_t>(ra)] + comp_size[static_cast<std::size_t>(rb)] >
            max_stratum_size)
            continue;
        const int keep = std::min(ra, rb);
        const int drop = std::max(ra, rb);
        parent[static_cast<std::size_t>(drop)] = keep;
        comp_size[static_cast<std::size_t>(keep)] += comp_size[static_cast<std::size_t>(drop)];
        comp_cases[static_cast<std::size_t>(keep)] += comp_cases[static_cast<std::size_t>(drop)];
        comp_controls[static_cast<std::size_t>(keep)] +=
            comp_controls[static_cast<std::size_t>(drop)];
    }

    MatchedStrata out;
    std::vector<int> stratum_of(static_cast<std::size_t>(n), -1);
    std::vector<int> stratum_of_root(static_cast<std::size_t>(n), -1);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const int r = find(static_cast<int>(i));
        if (comp_cases[static_cast<std::size_t>(r)] == 0 ||
            comp_controls[static_cast<std::size_t>(r)] == 0)
            continue;
        int s = stratum_of_root[static_cast<std::size_t>(r)];
        if (s < 0)
        {
            s = out.n_strata();
            out.strata.emplace_back();
            stratum_of_root[static_cast<std::size_t>(r)] = s;
        }
        out.strata[static_cast<std::size_t>(s)].push_back(static_cast<int>(i));
        stratum_of[static_cast<std::size_t>(i)] = s;
    }

    for (Eigen::Index i = 0; i < n; ++i)
    {
        if (stratum_of[static_cast<std::size_t>(i)] >= 0)
            continue;
        int best = -1;
        double best_dist = 0.0;
        bool best_open = false;
        for (int s = 0; s < out.n_strata(); ++s)
        {
            double d = std::numeric_limits<double>::infinity();
            for (int member : out.strata[static_cast<std::size_t>(s)])
                d = std::min(d, dist(i, member));
            const bool open =
                static_cast<int>(out.strata[static_cast<std::size_t>(s)].size()) < max_stratum_size;
            const bool better = best < 0 || (open && !best_open) ||
                                (open == best_open && d < best_dist);
            if (better)
            {
                best = s;
                best_dist = d;
                best_open = open;
            }
        }
        out.strata[static_cast<std::size_t>(best)].push_back(static_cast<int>(i));
        stratum_of[static_cast<std::size_t>(i)] = best;
    }

    out.case_count.resize(out.strata.size());
    out.control_count.resize(out.strata.size());
    for (std::size_t s = 0; s < out.strata.size(); ++s)
    {
        std::sort(out.strata[s].begin(), out.strata[s].end());
        int cc = 0;
        int kc = 0;
        for (int member : out.strata[s])
            (phenotype(member) == 1 ? cc : kc)++;
        out.case_count[s] = cc;
        out.control_count[s] = kc;
        if (cc == 0 || kc == 0)
            throw NumericError("internal error: stratum lost its case or control");
        for (std::size_t a = 0; a < out.strata[s].size(); ++a)
            for (std::size_t b = a + 1; b < out.strata[s].size(); ++b)
                out.total_distance += dist(out.strata[s][a], out.strata[s][b]);
    }
    return out;
}

}  // namespace sga
