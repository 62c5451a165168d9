#pragma once

#include "perturblearn/influence.hpp"

#include <string>
#include <utility>
#include <vector>

namespace perturblearn {

struct GraphConfig {
    double threshold = 0.1;  // sparsity s: entries with |w| <= s are zeroed
};

struct GraphNode {
    std::string name;
    std::vector<int> channels;  // latent columns owned by this node
};

// Directed graph over attribute names plus confounded pairs. Edges and pairs
// are kept in a fixed deterministic order (by node input order); confounded
// pairs are rendered as bidirectional edges only at export time. For a
// confounded group the jointly-owned channels are stored on the group's first
// member so that channels stay disjoint across nodes; markov_blanket
// re-attributes them to every member.
struct CausalGraph {
    std::vector<GraphNode> nodes;
    std::vector<std::pair<std::string, std::string>> directedEdges;
    std::vector<std::pair<std::string, std::string>> confoundedPairs;

    int nodeIndex(const std::string& name) const;  // -1 when unknown
    bool hasDirectedEdge(const std::string& src, const std::string& dst) const;
    bool hasConfoundedPair(const std::string& a, const std::string& b) const;
};

struct BlanketResult {
    std::string attribute;
    std::vector<std::string> blanketAttrs;  // parents + children + co-parents
    std::vector<int> directLatents;         // channels, group-attributed
};

// Zeroes entries with |w| <= threshold and drops all-zero columns. Column
// labels are preserved.
InfluenceMatrix thresholdMatrix(const InfluenceMatrix& W, const GraphConfig& cfg);

// Peels minimal-influence latent columns to order the attributes, emitting
// confounded groups where several attributes share a minimal column, then
// applies transitive reduction. Attributes whose rows vanished in
// thresholding become isolated nodes. Throws AlgorithmError when the peeled
// edge set contains a cycle.
CausalGraph learnGraph(const InfluenceMatrix& thresholded);

// Unique minimal edge subgraph of a DAG with the same reachability. Nodes are
// 0..nodeCount-1. Throws AlgorithmError when the input has a cycle.
std::vector<std::pair<int, int>> transitiveReduction(
    int nodeCount, const std::vector<std::pair<int, int>>& edges);

// Parents, children and co-parents; a confounded partner counts as both
// parent and child. direct_latents unions the channels across the
// attribute's confounded partners (group attribution).
BlanketResult markovBlanket(const CausalGraph& g, const std::string& attr);

// Checks that every thresholded column's support is contained in
// {owners} U descendants(owners) of the final directed graph.
bool influenceConsistent(const InfluenceMatrix& thresholded, const CausalGraph& g);

} // namespace perturblearn
