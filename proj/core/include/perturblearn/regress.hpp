#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace perturblearn {

enum class RegressorKind { Linear, Ridge, RbfKernelRidge, Forest };

std::string regressorKindName(RegressorKind kind);
RegressorKind regressorKindFromName(const std::string& name);

struct RegressorOptions {
    RegressorKind kind = RegressorKind::Linear;
    double ridgeLambda = 1.0;
    double kernelLambda = 1e-3;
    double rbfGamma = 0.0;        // 0 -> 1/p on standardized features
    int forestTrees = 10;
    std::uint64_t seed = 0;
};

// Fitted predictor. Features are standardized internally on the training set;
// the intercept (target mean) is unpenalized. Deterministic given the seed.
class Regressor {
public:
    static Regressor fit(const std::vector<std::vector<double>>& features,
                         const std::vector<double>& targets, const RegressorOptions& options);

    double predict(const std::vector<double>& row) const;
    std::vector<double> predict(const std::vector<std::vector<double>>& rows) const;

    // Pure linear fit hit singular normal equations and fell back to a
    // 1e-8 ridge jitter.
    bool usedRidgeFallback() const;

    struct Impl;

private:
    std::shared_ptr<const Impl> impl_;
};

// Single CART regression tree; exposed so the forest's building block can be
// tested against an independent oracle. maxFeatures <= 0 uses all features.
class RegressionTree {
public:
    void fit(const std::vector<std::vector<double>>& features, const std::vector<double>& targets,
             const std::vector<int>& sampleIndices, std::uint64_t seed, int maxFeatures);
    double predict(const std::vector<double>& row) const;

private:
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };
    std::vector<Node> nodes_;
    int build(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
              std::vector<int>& idx, int lo, int hi, class Rng& rng, int maxFeatures);
};

} // namespace perturblearn
