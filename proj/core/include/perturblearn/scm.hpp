#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace perturblearn {

enum class Nonlinearity { Linear, Tanh };

struct ScmEdge {
    std::string parent;
    std::string child;
    double coeff = 0.0;
};

struct LatentAssignment {
    std::string attr;
    int latent = 0;
    double coeff = 0.0;
};

struct ShiftTerm {
    std::string parent;
    std::string child;
    double multiplier = 1.0;
};

using LatentVector = std::vector<double>;
using AttributeVector = std::vector<double>;  // entries aligned with attributeNames

// Ground-truth structural causal model over named attributes. Latents are the
// exogenous inputs; each attribute is a (optionally tanh-squashed) linear
// combination of its parent attributes and its assigned latent channels.
struct ScmSpec {
    std::vector<std::string> attributeNames;
    int latentDim = 0;
    std::vector<ScmEdge> edges;
    std::vector<LatentAssignment> latentAssignments;
    Nonlinearity nonlinearity = Nonlinearity::Linear;
    std::map<std::string, std::vector<ShiftTerm>> shiftProfiles;
    std::string targetAttr;

    int attributeIndex(const std::string& name) const;  // -1 when unknown

    // Throws ValidationError on any invariant breach: duplicate/unknown names,
    // cyclic edges, out-of-range latents, attribute without a latent
    // assignment, profile touching a nonexistent edge, non-finite coefficient.
    void validate() const;

    // Attribute indices in a dependency-respecting order. Throws on cycles.
    std::vector<int> topologicalOrder() const;
};

std::vector<LatentVector> sampleLatent(const ScmSpec& spec, int count, std::uint64_t seed);

// Evaluates the SCM at z, optionally under a named shift profile (coefficient
// multipliers on edges; structure untouched). Deterministic.
AttributeVector evaluate(const ScmSpec& spec, const LatentVector& z,
                         const std::string& profile = std::string());

// Spec compiled for repeated evaluation (hot loops in perturbation and the
// eval harness). Same results as evaluate(), bit for bit.
class ScmModel {
public:
    ScmModel(const ScmSpec& spec, const std::string& profile = std::string());
    AttributeVector evaluate(const LatentVector& z) const;
    int attrCount() const { return static_cast<int>(order_.size()); }

private:
    struct Term {
        int index;
        double coeff;
    };
    std::vector<int> order_;
    std::vector<std::vector<Term>> parentTerms_;  // per attr
    std::vector<std::vector<Term>> latentTerms_;  // per attr
    bool tanh_ = false;
};

struct RandomSpecOptions {
    Nonlinearity nonlinearity = Nonlinearity::Tanh;
    double edgeCoeffMin = 0.8;
    double edgeCoeffMax = 1.6;
    double latentCoeffMin = 0.5;
    double latentCoeffMax = 1.5;
};

// Random ground-truth generator. Non-confounded attributes own one dedicated
// latent each; each confounder is a latent shared by a pair of twin sink
// attributes with identical parent sets (the family on which the peeling
// algorithm is exact). Leftover latents stay inert. Coefficient magnitudes are
// bounded away from zero so thresholding is well-posed.
ScmSpec randomSpec(int nAttrs, int latentDim, double edgeDensity, int confounderCount,
                   std::uint64_t seed, const RandomSpecOptions& options = {});

} // namespace perturblearn
