#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

namespace circadian::testing {

/// Exact optimal transport cost Σ c_ij π_ij between discrete marginals a and b,
/// by successive shortest augmenting paths (Bellman-Ford on the residual graph).
inline double lp_transport_cost(const std::vector<double>& a, const std::vector<double>& b,
                                const std::vector<std::vector<double>>& cost) {
    struct Edge {
        int to;
        double cap;
        double cost;
        int rev;
    };
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());
    const int source = n + m, sink = n + m + 1, nodes = n + m + 2;
    std::vector<std::vector<Edge>> g(nodes);
    auto add = [&](int u, int v, double cap, double c) {
        g[u].push_back({v, cap, c, static_cast<int>(g[v].size())});
        g[v].push_back({u, 0.0, -c, static_cast<int>(g[u].size()) - 1});
    };
    const double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) add(source, i, a[i], 0.0);
    for (int j = 0; j < m; ++j) add(n + j, sink, b[j], 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) add(i, n + j, inf, cost[i][j]);
    }
    constexpr double kTiny = 1e-15;
    double total = 0.0;
    for (;;) {
        std::vector<double> dist(nodes, inf);
        std::vector<int> prev_node(nodes, -1), prev_edge(nodes, -1);
        dist[source] = 0.0;
        for (int round = 0; round < nodes; ++round) {
            bool changed = false;
            for (int u = 0; u < nodes; ++u) {
                if (dist[u] == inf) continue;
                for (int k = 0; k < static_cast<int>(g[u].size()); ++k) {
                    const Edge& e = g[u][k];
                    if (e.cap > kTiny && dist[u] + e.cost < dist[e.to] - 1e-15) {
                        dist[e.to] = dist[u] + e.cost;
                        prev_node[e.to] = u;
                        prev_edge[e.to] = k;
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
        if (dist[sink] == inf) break;
        double push = inf;
        for (int v = sink; v != source; v = prev_node[v]) push = std::min(push, g[prev_node[v]][prev_edge[v]].cap);
        for (int v = sink; v != source; v = prev_node[v]) {
            Edge& e = g[prev_node[v]][prev_edge[v]];
            e.cap -= push;
            g[v][e.rev].cap += push;
        }
        total += push * dist[sink];
    }
    return total;
}

}  // namespace circadian::testing
