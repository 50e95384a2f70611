#pragma once

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nncrit/error.hpp"
#include "nncrit/linalg.hpp"

namespace nncrit::models {

/// Undirected graph on d nodes. Nodes are 0-based internally and 1-based in
/// the text form "1-2,2-3". Edges are kept sorted with i < j.
class GraphSpec {
public:
    using Edge = std::pair<int, int>;

    GraphSpec() = default;

    GraphSpec(int d, std::vector<Edge> edges) : d_(d), edges_(std::move(edges)) {
        if (d < 1) throw DomainError("GraphSpec: node count must be positive");
        for (auto& [i, j] : edges_) {
            if (i == j || i < 0 || j < 0 || i >= d || j >= d)
                throw DomainError("GraphSpec: invalid edge (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                  ")");
            if (i > j) std::swap(i, j);
        }
        std::sort(edges_.begin(), edges_.end());
        edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    }

    static GraphSpec complete(int d) {
        std::vector<Edge> e;
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) e.emplace_back(i, j);
        return {d, std::move(e)};
    }

    static GraphSpec empty(int d) { return {d, {}}; }

    /// Parses "1-2,2-3" (1-based). An empty string or "none" is the empty graph.
    static GraphSpec parse(int d, const std::string& text) {
        std::vector<Edge> edges;
        if (text.empty() || text == "none") return {d, edges};
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto dash = item.find('-');
            if (dash == std::string::npos) throw ParseError("graph: expected i-j, got '" + item + "'");
            try {
                const int i = std::stoi(item.substr(0, dash));
                const int j = std::stoi(item.substr(dash + 1));
                edges.emplace_back(i - 1, j - 1);
            } catch (const std::logic_error&) {
                throw ParseError("graph: bad node index in '" + item + "'");
            }
        }
        return {d, edges};
    }

    /// All 2^{d(d-1)/2} graphs on d nodes. Graph number b contains the k-th
    /// pair of the lexicographic pair list iff bit k of b is set.
    static std::vector<GraphSpec> enumerate_all(int d) {
        const auto pairs = complete(d).edges();
        if (pairs.size() > 20) throw DomainError("GraphSpec: exhaustive enumeration limited to d <= 6");
        std::vector<GraphSpec> out;
        const std::uint32_t count = 1u << pairs.size();
        for (std::uint32_t b = 0; b < count; ++b) {
            std::vector<Edge> e;
            for (std::size_t k = 0; k < pairs.size(); ++k)
                if (b & (1u << k)) e.push_back(pairs[k]);
            out.emplace_back(d, std::move(e));
        }
        return out;
    }

    int nodes() const { return d_; }
    const std::vector<Edge>& edges() const { return edges_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    /// Free entries of the patterned precision matrix: d diagonal + |E|.
    int free_parameters() const { return d_ + edge_count(); }

    bool has_edge(int i, int j) const {
        if (i > j) std::swap(i, j);
        return std::binary_search(edges_.begin(), edges_.end(), Edge{i, j});
    }

    std::string to_string() const {
        if (edges_.empty()) return "none";
        std::string s;
        for (const auto& [i, j] : edges_) {
            if (!s.empty()) s += ',';
            s += std::to_string(i + 1) + "-" + std::to_string(j + 1);
        }
        return s;
    }

    /// Precision matrix from the leading free_parameters() entries of theta:
    /// diagonal first, then one value per edge for the symmetric pair.
    Matrix precision(const Vector& theta) const {
        Matrix k = Matrix::Zero(d_, d_);
        for (int i = 0; i < d_; ++i) k(i, i) = theta[i];
        for (int e = 0; e < edge_count(); ++e) {
            const auto [i, j] = edges_[e];
            k(i, j) = k(j, i) = theta[d_ + e];
        }
        return k;
    }

    /// Inverse of precision(): reads the pattern entries of k.
    Vector pattern_entries(const Matrix& k) const {
        Vector theta(free_parameters());
        for (int i = 0; i < d_; ++i) theta[i] = k(i, i);
        for (int e = 0; e < edge_count(); ++e) theta[d_ + e] = k(edges_[e].first, edges_[e].second);
        return theta;
    }

    friend bool operator==(const GraphSpec& a, const GraphSpec& b) { return a.d_ == b.d_ && a.edges_ == b.edges_; }

private:
    int d_ = 1;
    std::vector<Edge> edges_;
};

}  // namespace nncrit::models
