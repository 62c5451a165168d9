#include "perturblearn/graph.hpp"

#include "perturblearn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>

namespace perturblearn {

int CausalGraph::nodeIndex(const std::string& name) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

bool CausalGraph::hasDirectedEdge(const std::string& src, const std::string& dst) const {
    return std::find(directedEdges.begin(), directedEdges.end(), std::make_pair(src, dst)) !=
           directedEdges.end();
}

bool CausalGraph::hasConfoundedPair(const std::string& a, const std::string& b) const {
    return std::find(confoundedPairs.begin(), confoundedPairs.end(), std::make_pair(a, b)) !=
               confoundedPairs.end() ||
           std::find(confoundedPairs.begin(), confoundedPairs.end(), std::make_pair(b, a)) !=
               confoundedPairs.end();
}

InfluenceMatrix thresholdMatrix(const InfluenceMatrix& W, const GraphConfig& cfg) {
    if (cfg.threshold <= 0.0) throw ValidationError("graph threshold must be positive");

    InfluenceMatrix out;
    out.attrNames = W.attrNames;

    const int rows = W.rowCount();
    const int cols = W.colCount();
    std::vector<int> keep;
    for (int j = 0; j < cols; ++j) {
        bool any = false;
        for (int i = 0; i < rows; ++i) {
            if (std::abs(W.values[i][j]) > cfg.threshold) {
                any = true;
                break;
            }
        }
        if (any) keep.push_back(j);
    }

    out.latentIndices.reserve(keep.size());
    for (int j : keep) out.latentIndices.push_back(W.latentIndices[j]);
    out.values.assign(rows, std::vector<double>(keep.size(), 0.0));
    for (int i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < keep.size(); ++k) {
            const double v = W.values[i][keep[k]];
            out.values[i][k] = std::abs(v) > cfg.threshold ? v : 0.0;
        }
    }
    if (!W.columnInfo.empty()) {
        out.columnInfo.reserve(keep.size());
        for (int j : keep) out.columnInfo.push_back(W.columnInfo[j]);
    }
    return out;
}

std::vector<std::pair<int, int>> transitiveReduction(
    int nodeCount, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(nodeCount);
    for (const auto& [u, v] : edges) {
        if (u < 0 || v < 0 || u >= nodeCount || v >= nodeCount) {
            throw ValidationError("transitive_reduction: node index out of range");
        }
        adj[u].push_back(v);
    }

    // Cycle check via DFS coloring; reports one offending cycle.
    std::vector<int> color(nodeCount, 0);
    std::vector<int> stack;
    const std::function<void(int)> visit = [&](int u) {
        color[u] = 1;
        stack.push_back(u);
        for (int v : adj[u]) {
            if (color[v] == 1) {
                std::string cyc;
                const auto it = std::find(stack.begin(), stack.end(), v);
                for (auto p = it; p != stack.end(); ++p) cyc += std::to_string(*p) + " -> ";
                cyc += std::to_string(v);
                throw AlgorithmError("cycle detected: " + cyc);
            }
            if (color[v] == 0) visit(v);
        }
        stack.pop_back();
        color[u] = 2;
    };
    for (int u = 0; u < nodeCount; ++u) {
        if (color[u] == 0) visit(u);
    }

    // Reachability closure per node, then keep (u, v) only when no
    // intermediate successor of u reaches v.
    std::vector<std::set<int>> reach(nodeCount);
    const std::function<const std::set<int>&(int)> closure = [&](int u) -> const std::set<int>& {
        if (!reach[u].empty() || adj[u].empty()) return reach[u];
        for (int v : adj[u]) {
            reach[u].insert(v);
            const auto& sub = closure(v);
            reach[u].insert(sub.begin(), sub.end());
        }
        return reach[u];
    };
    for (int u = 0; u < nodeCount; ++u) closure(u);

    std::vector<std::pair<int, int>> kept;
    for (const auto& [u, v] : edges) {
        bool redundant = false;
        for (int w : adj[u]) {
            if (w != v && reach[w].count(v)) {
                redundant = true;
                break;
            }
        }
        if (!redundant) kept.push_back({u, v});
    }
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    return kept;
}

CausalGraph learnGraph(const InfluenceMatrix& thresholded) {
    const int nAttrs = thresholded.rowCount();
    const int nCols = thresholded.colCount();

    // Original supports (row sets per column) for successor lookups.
    std::vector<std::vector<int>> support(nCols);
    for (int j = 0; j < nCols; ++j) {
        for (int i = 0; i < nAttrs; ++i) {
            if (thresholded.values[i][j] != 0.0) support[j].push_back(i);
        }
    }

    CausalGraph g;
    g.nodes.reserve(nAttrs);
    for (const auto& name : thresholded.attrNames) g.nodes.push_back({name, {}});

    std::vector<std::uint8_t> rowRemaining(nAttrs, 0);
    for (int j = 0; j < nCols; ++j) {
        for (int i : support[j]) rowRemaining[i] = 1;
    }
    // Attributes with all-zero rows stay isolated nodes with empty channels.

    std::vector<std::uint8_t> colActive(nCols, 1);
    std::vector<std::set<int>> current(nCols);
    for (int j = 0; j < nCols; ++j) {
        current[j] = {support[j].begin(), support[j].end()};
        if (current[j].empty()) colActive[j] = 0;
    }

    std::set<std::pair<int, int>> edgeSet;          // directed, by node index
    std::vector<std::pair<int, int>> pairList;      // confounded, insertion order

    const auto anyActive = [&] {
        for (int j = 0; j < nCols; ++j) {
            if (colActive[j]) return true;
        }
        return false;
    };

    while (anyActive()) {
        std::size_t minCount = 0;
        for (int j = 0; j < nCols; ++j) {
            if (!colActive[j]) continue;
            if (minCount == 0 || current[j].size() < minCount) minCount = current[j].size();
        }
        std::vector<int> leafCols;
        for (int j = 0; j < nCols; ++j) {
            if (colActive[j] && current[j].size() == minCount) leafCols.push_back(j);
        }
        std::set<int> leafRows;
        for (int j : leafCols) leafRows.insert(current[j].begin(), current[j].end());

        if (minCount == 1) {
            for (int attr : leafRows) {
                std::vector<int> channels;
                for (int j : leafCols) {
                    if (current[j].count(attr)) channels.push_back(j);
                }
                for (int j : channels) g.nodes[attr].channels.push_back(thresholded.latentIndices[j]);
                for (int j : channels) {
                    for (int k : support[j]) {
                        if (k != attr) edgeSet.insert({attr, k});
                    }
                }
            }
        } else {
            // Group minimal columns by identical remaining support.
            std::vector<std::pair<std::vector<int>, std::vector<int>>> groups;  // pattern -> cols
            for (int j : leafCols) {
                const std::vector<int> pattern(current[j].begin(), current[j].end());
                bool found = false;
                for (auto& gr : groups) {
                    if (gr.first == pattern) {
                        gr.second.push_back(j);
                        found = true;
                        break;
                    }
                }
                if (!found) groups.push_back({pattern, {j}});
            }
            for (const auto& [attrs, colsOfGroup] : groups) {
                // Singleton pattern behaves exactly like the count-1 case.
                if (attrs.size() > 1) {
                    for (std::size_t x = 0; x < attrs.size(); ++x) {
                        for (std::size_t y = x + 1; y < attrs.size(); ++y) {
                            pairList.push_back({attrs[x], attrs[y]});
                        }
                    }
                }
                // Group channels live on the first member without channels yet
                // (first member as fallback) so node channel sets stay disjoint.
                int ownerRow = attrs.front();
                for (int a : attrs) {
                    if (g.nodes[a].channels.empty()) {
                        ownerRow = a;
                        break;
                    }
                }
                for (int j : colsOfGroup) {
                    g.nodes[ownerRow].channels.push_back(thresholded.latentIndices[j]);
                }
                std::set<int> succ;
                for (int j : colsOfGroup) {
                    for (int k : support[j]) succ.insert(k);
                }
                for (int a : attrs) succ.erase(a);
                for (int a : attrs) {
                    for (int s : succ) edgeSet.insert({a, s});
                }
            }
        }

        for (int j = 0; j < nCols; ++j) {
            if (!colActive[j]) continue;
            for (int r : leafRows) current[j].erase(r);
            if (current[j].empty()) colActive[j] = 0;
        }
    }

    const std::vector<std::pair<int, int>> reduced =
        transitiveReduction(nAttrs, {edgeSet.begin(), edgeSet.end()});

    for (const auto& [u, v] : reduced) {
        g.directedEdges.push_back({g.nodes[u].name, g.nodes[v].name});
    }
    std::sort(pairList.begin(), pairList.end());
    pairList.erase(std::unique(pairList.begin(), pairList.end()), pairList.end());
    for (const auto& [a, b] : pairList) {
        g.confoundedPairs.push_back({g.nodes[a].name, g.nodes[b].name});
    }
    return g;
}

BlanketResult markovBlanket(const CausalGraph& g, const std::string& attr) {
    const int self = g.nodeIndex(attr);
    if (self < 0) throw ValidationError("unknown attribute: " + attr);

    const int n = static_cast<int>(g.nodes.size());
    std::vector<std::set<int>> parents(n), children(n);
    for (const auto& [src, dst] : g.directedEdges) {
        const int u = g.nodeIndex(src);
        const int v = g.nodeIndex(dst);
        parents[v].insert(u);
        children[u].insert(v);
    }
    std::vector<std::set<int>> partners(n);
    for (const auto& [a, b] : g.confoundedPairs) {
        const int u = g.nodeIndex(a);
        const int v = g.nodeIndex(b);
        partners[u].insert(v);
        partners[v].insert(u);
    }
    // A confounded partner counts as both parent and child.
    const auto parentsOf = [&](int x) {
        std::set<int> out = parents[x];
        out.insert(partners[x].begin(), partners[x].end());
        return out;
    };
    const auto childrenOf = [&](int x) {
        std::set<int> out = children[x];
        out.insert(partners[x].begin(), partners[x].end());
        return out;
    };

    std::set<int> blanket = parentsOf(self);
    const std::set<int> kids = childrenOf(self);
    blanket.insert(kids.begin(), kids.end());
    for (int c : kids) {
        const std::set<int> cop = parentsOf(c);
        blanket.insert(cop.begin(), cop.end());
    }
    blanket.erase(self);

    BlanketResult res;
    res.attribute = attr;
    for (int b : blanket) res.blanketAttrs.push_back(g.nodes[b].name);

    std::set<int> latents(g.nodes[self].channels.begin(), g.nodes[self].channels.end());
    for (int p : partners[self]) {
        latents.insert(g.nodes[p].channels.begin(), g.nodes[p].channels.end());
    }
    res.directLatents.assign(latents.begin(), latents.end());
    return res;
}

bool influenceConsistent(const InfluenceMatrix& thresholded, const CausalGraph& g) {
    const int n = static_cast<int>(g.nodes.size());
    std::vector<std::set<int>> adj(n);
    for (const auto& [src, dst] : g.directedEdges) {
        adj[g.nodeIndex(src)].insert(g.nodeIndex(dst));
    }
    // Descendants via DFS from each owner set (directed edges only).
    const auto descendantsOf = [&](const std::vector<int>& owners) {
        std::set<int> seen(owners.begin(), owners.end());
        std::vector<int> stack(owners.begin(), owners.end());
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v : adj[u]) {
                if (seen.insert(v).second) stack.push_back(v);
            }
        }
        return seen;
    };

    for (int j = 0; j < thresholded.colCount(); ++j) {
        const int latent = thresholded.latentIndices[j];
        std::vector<int> owners;
        for (int i = 0; i < n; ++i) {
            const auto& ch = g.nodes[i].channels;
            if (std::find(ch.begin(), ch.end(), latent) != ch.end()) {
                owners.push_back(i);
                // Group channels are stored on one member; co-owners are its
                // confounded partners.
                for (const auto& [a, b] : g.confoundedPairs) {
                    if (g.nodes[i].name == a) owners.push_back(g.nodeIndex(b));
                    if (g.nodes[i].name == b) owners.push_back(g.nodeIndex(a));
                }
            }
        }
        if (owners.empty()) return false;
        const std::set<int> allowed = descendantsOf(owners);
        for (int i = 0; i < thresholded.rowCount(); ++i) {
            if (thresholded.values[i][j] != 0.0 && !allowed.count(i)) return false;
        }
    }
    return true;
}

} // namespace perturblearn
