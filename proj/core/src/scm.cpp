#include "perturblearn/scm.hpp"

#include "perturblearn/errors.hpp"
#include "perturblearn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace perturblearn {

int ScmSpec::attributeIndex(const std::string& name) const {
    for (std::size_t i = 0; i < attributeNames.size(); ++i) {
        if (attributeNames[i] == name) return static_cast<int>(i);
    }
    return -1;
}

std::vector<int> ScmSpec::topologicalOrder() const {
    const int n = static_cast<int>(attributeNames.size());
    std::vector<std::vector<int>> children(n);
    std::vector<int> indegree(n, 0);
    for (const auto& e : edges) {
        const int p = attributeIndex(e.parent);
        const int c = attributeIndex(e.child);
        if (p < 0 || c < 0) throw ValidationError("edge references unknown attribute: " + e.parent + " -> " + e.child);
        children[p].push_back(c);
        ++indegree[c];
    }
    std::vector<int> order;
    order.reserve(n);
    std::vector<int> ready;
    for (int i = 0; i < n; ++i) {
        if (indegree[i] == 0) ready.push_back(i);
    }
    // Kahn's algorithm; smallest index first keeps the order deterministic.
    while (!ready.empty()) {
        std::sort(ready.begin(), ready.end(), std::greater<int>());
        const int u = ready.back();
        ready.pop_back();
        order.push_back(u);
        for (int v : children[u]) {
            if (--indegree[v] == 0) ready.push_back(v);
        }
    }
    if (static_cast<int>(order.size()) != n) {
        throw ValidationError("attribute edges contain a cycle");
    }
    return order;
}

void ScmSpec::validate() const {
    if (attributeNames.empty()) throw ValidationError("spec has no attributes");
    if (latentDim < 1) throw ValidationError("latent_dim must be positive");

    std::unordered_set<std::string> seen;
    for (const auto& name : attributeNames) {
        if (name.empty()) throw ValidationError("empty attribute name");
        if (!seen.insert(name).second) throw ValidationError("duplicate attribute name: " + name);
    }

    std::set<std::pair<std::string, std::string>> edgeSet;
    for (const auto& e : edges) {
        if (attributeIndex(e.parent) < 0 || attributeIndex(e.child) < 0) {
            throw ValidationError("edge references unknown attribute: " + e.parent + " -> " + e.child);
        }
        if (e.parent == e.child) throw ValidationError("self-edge on " + e.parent);
        if (!edgeSet.insert({e.parent, e.child}).second) {
            throw ValidationError("duplicate edge " + e.parent + " -> " + e.child);
        }
        if (!std::isfinite(e.coeff)) throw ValidationError("non-finite coefficient on edge " + e.parent + " -> " + e.child);
    }

    std::vector<int> assignmentsPerAttr(attributeNames.size(), 0);
    for (const auto& a : latentAssignments) {
        const int idx = attributeIndex(a.attr);
        if (idx < 0) throw ValidationError("latent assignment references unknown attribute: " + a.attr);
        if (a.latent < 0 || a.latent >= latentDim) {
            throw ValidationError("latent index out of range for attribute " + a.attr);
        }
        if (!std::isfinite(a.coeff)) throw ValidationError("non-finite latent coefficient on " + a.attr);
        ++assignmentsPerAttr[idx];
    }
    for (std::size_t i = 0; i < attributeNames.size(); ++i) {
        if (assignmentsPerAttr[i] == 0) {
            throw ValidationError("attribute without latent assignment: " + attributeNames[i]);
        }
    }

    for (const auto& [name, terms] : shiftProfiles) {
        if (name.empty()) throw ValidationError("empty shift profile name");
        for (const auto& t : terms) {
            if (!edgeSet.count({t.parent, t.child})) {
                throw ValidationError("shift profile '" + name + "' touches nonexistent edge " +
                                      t.parent + " -> " + t.child);
            }
            if (!std::isfinite(t.multiplier)) {
                throw ValidationError("non-finite multiplier in shift profile '" + name + "'");
            }
        }
    }

    if (!targetAttr.empty() && attributeIndex(targetAttr) < 0) {
        throw ValidationError("target attribute not in spec: " + targetAttr);
    }

    topologicalOrder();
}

std::vector<LatentVector> sampleLatent(const ScmSpec& spec, int count, std::uint64_t seed) {
    if (count < 1) throw ValidationError("sample count must be >= 1");
    Rng rng(seed);
    std::vector<LatentVector> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        LatentVector z(spec.latentDim);
        for (auto& v : z) v = rng.normal();
        out.push_back(std::move(z));
    }
    return out;
}

ScmModel::ScmModel(const ScmSpec& spec, const std::string& profile) {
    const int n = static_cast<int>(spec.attributeNames.size());
    order_ = spec.topologicalOrder();
    parentTerms_.resize(n);
    latentTerms_.resize(n);
    tanh_ = spec.nonlinearity == Nonlinearity::Tanh;

    std::map<std::pair<std::string, std::string>, double> multipliers;
    if (!profile.empty()) {
        const auto it = spec.shiftProfiles.find(profile);
        if (it == spec.shiftProfiles.end()) throw ValidationError("unknown shift profile: " + profile);
        for (const auto& t : it->second) multipliers[{t.parent, t.child}] = t.multiplier;
    }

    for (const auto& e : spec.edges) {
        const int p = spec.attributeIndex(e.parent);
        const int c = spec.attributeIndex(e.child);
        double coeff = e.coeff;
        const auto it = multipliers.find({e.parent, e.child});
        if (it != multipliers.end()) coeff *= it->second;
        parentTerms_[c].push_back({p, coeff});
    }
    for (const auto& a : spec.latentAssignments) {
        latentTerms_[spec.attributeIndex(a.attr)].push_back({a.latent, a.coeff});
    }
}

AttributeVector ScmModel::evaluate(const LatentVector& z) const {
    AttributeVector a(order_.size(), 0.0);
    for (int i : order_) {
        double s = 0.0;
        for (const auto& t : parentTerms_[i]) s += t.coeff * a[t.index];
        for (const auto& t : latentTerms_[i]) s += t.coeff * z[t.index];
        a[i] = tanh_ ? std::tanh(s) : s;
    }
    return a;
}

AttributeVector evaluate(const ScmSpec& spec, const LatentVector& z, const std::string& profile) {
    if (static_cast<int>(z.size()) != spec.latentDim) {
        throw ValidationError("latent vector length does not match latent_dim");
    }
    return ScmModel(spec, profile).evaluate(z);
}

namespace {

double drawCoeff(Rng& rng, double lo, double hi) {
    const double c = rng.uniform(lo, hi);
    return rng.uniform() < 0.5 ? -c : c;
}

} // namespace

ScmSpec randomSpec(int nAttrs, int latentDim, double edgeDensity, int confounderCount,
                   std::uint64_t seed, const RandomSpecOptions& options) {
    if (nAttrs < 1) throw ValidationError("n_attrs must be >= 1");
    if (latentDim < nAttrs) throw ValidationError("latent_dim must be >= n_attrs");
    if (edgeDensity < 0.0 || edgeDensity > 1.0) throw ValidationError("edge_density must be in [0, 1]");
    if (confounderCount < 0) throw ValidationError("confounder_count must be >= 0");
    if (confounderCount > 0 && nAttrs < 2 * confounderCount + 1) {
        throw ValidationError("infeasible confounder_count for n_attrs");
    }

    Rng rng(seed);
    ScmSpec spec;
    spec.nonlinearity = options.nonlinearity;
    spec.latentDim = latentDim;
    for (int i = 0; i < nAttrs; ++i) spec.attributeNames.push_back("a" + std::to_string(i));

    // Indices are generated in topological order. The last 2*confounderCount
    // attributes are twin sinks: no outgoing edges, identical parent sets per
    // pair, one shared latent per pair as their only channel.
    const int twinStart = nAttrs - 2 * confounderCount;
    std::vector<int> nonTwin;
    for (int i = 0; i < twinStart; ++i) nonTwin.push_back(i);

    const auto edgeCoeff = [&] { return drawCoeff(rng, options.edgeCoeffMin, options.edgeCoeffMax); };
    const auto latentCoeff = [&] { return drawCoeff(rng, options.latentCoeffMin, options.latentCoeffMax); };

    for (std::size_t j = 0; j < nonTwin.size(); ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            if (rng.uniform() < edgeDensity) {
                spec.edges.push_back({spec.attributeNames[nonTwin[i]], spec.attributeNames[nonTwin[j]], edgeCoeff()});
            }
        }
    }

    for (int k = 0; k < confounderCount; ++k) {
        const int a = twinStart + 2 * k;
        const int b = a + 1;
        std::vector<int> parents;
        for (int p : nonTwin) {
            if (rng.uniform() < edgeDensity) parents.push_back(p);
        }
        if (parents.empty()) parents.push_back(nonTwin[rng.index(nonTwin.size())]);
        for (int p : parents) {
            spec.edges.push_back({spec.attributeNames[p], spec.attributeNames[a], edgeCoeff()});
            spec.edges.push_back({spec.attributeNames[p], spec.attributeNames[b], edgeCoeff()});
        }
    }

    int nextLatent = 0;
    for (int k = 0; k < confounderCount; ++k) {
        const int a = twinStart + 2 * k;
        const int b = a + 1;
        spec.latentAssignments.push_back({spec.attributeNames[a], nextLatent, latentCoeff()});
        spec.latentAssignments.push_back({spec.attributeNames[b], nextLatent, latentCoeff()});
        ++nextLatent;
    }
    for (int i = 0; i < twinStart; ++i) {
        spec.latentAssignments.push_back({spec.attributeNames[i], nextLatent, latentCoeff()});
        ++nextLatent;
    }

    // Target: the sink-most non-twin attribute when one exists, else the last.
    spec.targetAttr = spec.attributeNames[twinStart > 0 ? twinStart - 1 : nAttrs - 1];

    spec.validate();
    return spec;
}

} // namespace perturblearn
