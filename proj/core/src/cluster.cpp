#include "sga/cluster.hpp"

#include "sga/common.hpp"
#include "sga/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace sga
{

namespace
{

struct Agg
{
    int node = 0;
    int size = 0;
    Eigen::VectorXd centroid;
};

double ward_cost(const Agg& a, const Agg& b)
{
    const double na = a.size;
    const double nb = b.size;
    return na * nb / (na + nb) * (a.centroid - b.centroid).squaredNorm();
}

std::vector<MergeRecord> ward_linkage(const Eigen::MatrixXd& coords)
{
    const int n = static_cast<int>(coords.rows());
    std::vector<Agg> active(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        active[static_cast<std::size_t>(i)] = Agg{i, 1, coords.row(i).transpose()};

    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            cost(i, j) = ward_cost(active[static_cast<std::size_t>(i)],
                                   active[static_cast<std::size_t>(j)]);

    std::vector<MergeRecord> merges;
    merges.reserve(static_cast<std::size_t>(n - 1));
    int m = n;
    for (int step = 0; step < n - 1; ++step)
    {
        int bi = -1;
        int bj = -1;
        double best = 0.0;
        std::pair<int, int> best_key{0, 0};
        for (int i = 0; i < m; ++i)
        {
            for (int j = i + 1; j < m; ++j)
            {
                const auto& a = active[static_cast<std::size_t>(i)];
                const auto& b = active[static_cast<std::size_t>(j)];
                const std::pair<int, int> key{std::min(a.node, b.node), std::max(a.node, b.node)};
                const double c = cost(i, j);
                if (bi < 0 || c < best || (c == best && key < best_key))
                {
                    bi = i;
                    bj = j;
                    best = c;
                    best_key = key;
                }
            }
        }

        Agg& a = active[static_cast<std::size_t>(bi)];
        Agg& b = active[static_cast<std::size_t>(bj)];
        MergeRecord rec;
        rec.left = std::min(a.node, b.node);
        rec.right = std::max(a.node, b.node);
        rec.cost = best;
        rec.size = a.size + b.size;
        merges.push_back(rec);

        Agg merged;
        merged.node = n + step;
        merged.size = a.size + b.size;
        merged.centroid = (static_cast<double>(a.size) * a.centroid +
                           static_cast<double>(b.size) * b.centroid) /
                          static_cast<double>(merged.size);
        active[static_cast<std::size_t>(bi)] = std::move(merged);
        if (bj != m - 1)
        {
            active[static_cast<std::size_t>(bj)] = std::move(active[static_cast<std::size_t>(m - 1)]);
            for (int i = 0; i < m - 1; ++i)
            {
                if (i == bj)
                    continue;
                cost(std::min(i, bj), std::max(i, bj)) = cost(i, m - 1);
            }
        }
        --m;
        for (int i = 0; i < m; ++i)
        {
            if (i == bi)
                continue;
            cost(std::min(i, bi), std::max(i, bi)) =
                ward_cost(active[static_cast<std::size_t>(bi)], active[static_cast<std::size_t>(i)]);
        }
    }
    return merges;
}

/// Cut-level clusters after applying the first n - k merges; each cluster is
/// (node id, member leaves), ordered by smallest member.
std::vector<std::pair<int, std::vector<int>>> cut_clusters(const std::vector<MergeRecord>& merges,
                                                           int n, int k)
{
    std::vector<int> root(static_cast<std::size_t>(2 * n - 1));
    std::iota(root.begin(), root.end(), 0);
    const int applied = n - k;
    for (int s = 0; s < applied; ++s)
    {
        root[static_cast<std::size_t>(merges[static_cast<std::size_t>(s)].left)] = n + s;
        root[static_cast<std::size_t>(merges[static_cast<std::size_t>(s)].right)] = n + s;
    }
    auto find_root = [&](int v) {
        while (root[static_cast<std::size_t>(v)] != v)
            v = root[static_cast<std::size_t>(v)];
        return v;
    };
    std::map<int, std::vector<int>> members;
    for (int leaf = 0; leaf < n; ++leaf)
        members[find_root(leaf)].push_back(leaf);

    std::vector<std::pair<int, std::vector<int>>> out(members.begin(), members.end());
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.second.front() < b.second.front(); });
    return out;
}

}  // namespace

bool homogeneity_test(const Eigen::MatrixXd& coords, int p, const ThresholdModel& model)
{
    if (coords.rows() < 2)
        throw ValidationError("homogeneity_test needs at least 2 subjects");
    if (p < 2)
        throw ValidationError("homogeneity_test needs the panel SNP count p >= 2");
    WeightMatrix w = spectral_weights(coords);
    const Eigen::MatrixXd lap = normalized_laplacian(w);
    const Spectrum spec = eigendecompose(lap, SpectrumSource::laplacian);
    const EigengapReport report = select_dimension(spec, static_cast<int>(coords.rows()), p, model);
    return report.d_selected == 1;
}

ClusterModel ward_cluster(const Embedding& e, std::optional<int> k, int min_cluster_size, int p,
                          const ThresholdModel& model)
{
    const int n = static_cast<int>(e.coords.rows());
    if (n < 2)
        throw ValidationError("ward_cluster needs at least 2 subjects");
    if (!e.coords.allFinite())
        throw ValidationError("ward_cluster requires finite embedding coordinates");
    if (min_cluster_size < 1)
        throw ValidationError("min_cluster_size must be >= 1");
    if (k && (*k < 1 || *k > n))
        throw ValidationError("explicit cluster count k must lie in [1, n]");
    if (!k && p < 2)
        throw ValidationError("automatic cluster count needs the panel SNP count p >= 2");

    ClusterModel c;
    c.embedding_dim = e.d;
    c.merge_tree = ward_linkage(e.coords);

    int cut = 0;
    std::vector<std::pair<int, std::vector<int>>> clusters;
    if (k)
    {
        cut = *k;
        clusters = cut_clusters(c.merge_tree, n, cut);
    }
    else
    {
        std::map<int, bool> homogeneous;  // by dendrogram node id
        for (cut = 1; cut <= n; ++cut)
        {
            clusters = cut_clusters(c.merge_tree, n, cut);
            bool all_pass = true;
            for (const auto& [node, members] : clusters)
            {
                if (static_cast<int>(members.size()) < 2 * min_cluster_size)
                    continue;
                auto it = homogeneous.find(node);
                if (it == homogeneous.end())
                {
                    Eigen::MatrixXd sub(static_cast<Eigen::Index>(members.size()), e.coords.cols());
                    for (std::size_t r = 0; r < members.size(); ++r)
                        sub.row(static_cast<Eigen::Index>(r)) = e.coords.row(members[r]);
                    it = homogeneous.emplace(node, homogeneity_test(sub, p, model)).first;
                }
                if (!it->second)
                {
                    all_pass = false;
                    break;
                }
            }
            if (all_pass)
                break;
        }
    }

    c.assignment = Eigen::VectorXi::Constant(n, kOutlier);
    int kept = 0;
    int flagged = 0;
    for (const auto& [node, members] : clusters)
    {
        c.cut_nodes.push_back(node);
        if (static_cast<int>(members.size()) < min_cluster_size)
        {
            c.cut_labels.push_back("X" + std::to_string(flagged++));
            continue;
        }
        for (int leaf : members)
            c.assignment(leaf) = kept;
        c.cut_labels.push_back("C" + std::to_string(kept++));
    }
    c.n_clusters = kept;
    return c;
}

std::string dendrogram_export(const ClusterModel& c)
{
    const int n = c.n_subjects();
    const int k_cut = c.n_cut_clusters();
    if (k_cut == 0)
        throw ValidationError("dendrogram_export needs a clustered model");

    struct Part
    {
        std::string text;
        double height = 0.0;
    };
    std::map<int, Part> parts;
    for (int i = 0; i < k_cut; ++i)
        parts[c.cut_nodes[static_cast<std::size_t>(i)]] =
            Part{c.cut_labels[static_cast<std::size_t>(i)], 0.0};

    const int first_above = n - k_cut;
    for (int s = first_above; s < n - 1; ++s)
    {
        const MergeRecord& rec = c.merge_tree[static_cast<std::size_t>(s)];
        const Part& l = parts.at(rec.left);
        const Part& r = parts.at(rec.right);
        Part merged;
        merged.height = rec.cost;
        merged.text = "(" + l.text + ":" + format_value(rec.cost - l.height) + "," + r.text + ":" +
                      format_value(rec.cost - r.height) + ")";
        parts[n + s] = std::move(merged);
        parts.erase(rec.left);
        parts.erase(rec.right);
    }
    return parts.rbegin()->second.text + ";\n";
}

namespace
{

struct NewickParser
{
    const std::string& text;
    std::size_t pos = 0;
    std::vector<DendrogramNode>& nodes;

    void skip_space()
    {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw ParseError("dendrogram at position " + std::to_string(pos) + ": " + what);
    }

    char peek()
    {
        skip_space();
        if (pos >= text.size())
            fail("unexpected end of input");
        return text[pos];
    }

    double parse_length()
    {
        skip_space();
        const std::size_t start = pos;
        while (pos < text.size() &&
               (std::isdigit(static_cast<unsigned char>(text[pos])) ||
                std::strchr("+-.eE", text[pos]) != nullptr))
            ++pos;
        if (pos == start)
            fail("expected a branch length");
        try
        {
            return std::stod(text.substr(start, pos - start));
        }
        catch (const std::exception&)
        {
            fail("malformed branch length");
        }
    }

    /// Returns (node index, branchless height of that node).
    int parse_subtree()
    {
        if (peek() == '(')
        {
            ++pos;
            const int left = parse_subtree();
            if (peek() != ':')
                fail("expected ':' after left child");
            ++pos;
            const double llen = parse_length();
            if (peek() != ',')
                fail("expected ',' between children");
            ++pos;
            const int right = parse_subtree();
            if (peek() != ':')
                fail("expected ':' after right child");
            ++pos;
            const double rlen = parse_length();
            if (peek() != ')')
                fail("expected ')'");
            ++pos;
            DendrogramNode node;
            node.left = left;
            node.right = right;
            node.height = std::max(nodes[static_cast<std::size_t>(left)].height + llen,
                                   nodes[static_cast<std::size_t>(right)].height + rlen);
            nodes.push_back(node);
            return static_cast<int>(nodes.size()) - 1;
        }
        skip_space();
        const std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                std::strchr("_.-", text[pos]) != nullptr))
            ++pos;
        if (pos == start)
            fail("expected a leaf label");
        DendrogramNode node;
        node.label = text.substr(start, pos - start);
        nodes.push_back(node);
        return static_cast<int>(nodes.size()) - 1;
    }
};

}  // namespace

std::vector<DendrogramNode> parse_dendrogram(const std::string& newick)
{
    std::vector<DendrogramNode> nodes;
    NewickParser parser{newick, 0, nodes};
    parser.parse_subtree();
    if (parser.peek() != ';')
        parser.fail("expected ';' at end of tree");
    ++parser.pos;
    parser.skip_space();
    if (parser.pos != newick.size())
        parser.fail("trailing text after tree");
    return nodes;
}

}  // namespace sga
