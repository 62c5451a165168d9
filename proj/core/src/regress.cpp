#include "perturblearn/regress.hpp"

#include "perturblearn/errors.hpp"
#include "perturblearn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace perturblearn {

std::string regressorKindName(RegressorKind kind) {
    switch (kind) {
        case RegressorKind::Linear: return "linear";
        case RegressorKind::Ridge: return "ridge";
        case RegressorKind::RbfKernelRidge: return "rbf_kernel_ridge";
        case RegressorKind::Forest: return "forest";
    }
    return "unknown";
}

RegressorKind regressorKindFromName(const std::string& name) {
    if (name == "linear") return RegressorKind::Linear;
    if (name == "ridge") return RegressorKind::Ridge;
    if (name == "rbf_kernel_ridge") return RegressorKind::RbfKernelRidge;
    if (name == "forest") return RegressorKind::Forest;
    throw ValidationError("unknown regressor kind: " + name);
}

namespace {

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    void fit(const std::vector<std::vector<double>>& X) {
        const std::size_t p = X.front().size();
        mean.assign(p, 0.0);
        scale.assign(p, 1.0);
        for (const auto& row : X) {
            for (std::size_t j = 0; j < p; ++j) mean[j] += row[j];
        }
        for (auto& m : mean) m /= static_cast<double>(X.size());
        std::vector<double> ssd(p, 0.0);
        for (const auto& row : X) {
            for (std::size_t j = 0; j < p; ++j) {
                const double d = row[j] - mean[j];
                ssd[j] += d * d;
            }
        }
        for (std::size_t j = 0; j < p; ++j) {
            const double v = std::sqrt(ssd[j] / static_cast<double>(X.size()));
            if (v > 0.0) scale[j] = v;
        }
    }

    std::vector<double> apply(const std::vector<double>& row) const {
        std::vector<double> out(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / scale[j];
        return out;
    }
};

// Cholesky solve of a symmetric positive definite system; returns false when
// a pivot degenerates.
bool choleskySolve(std::vector<std::vector<double>> A, std::vector<double> b,
                   std::vector<double>& x) {
    const std::size_t n = A.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = A[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= A[i][k] * A[j][k];
            if (i == j) {
                if (s <= 0.0 || !std::isfinite(s)) return false;
                A[i][i] = std::sqrt(s);
            } else {
                A[i][j] = s / A[j][j];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= A[i][k] * b[k];
        b[i] = s / A[i][i];
    }
    x.assign(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= A[k][i] * x[k];
        x[i] = s / A[i][i];
    }
    return true;
}

} // namespace

struct Regressor::Impl {
    RegressorKind kind = RegressorKind::Linear;
    Standardizer stdzr;
    double interceptValue = 0.0;
    bool ridgeFallback = false;

    // Linear / ridge
    std::vector<double> weights;

    // Kernel ridge
    std::vector<std::vector<double>> trainRows;  // standardized
    std::vector<double> dual;
    double gamma = 0.0;

    // Forest
    std::vector<RegressionTree> trees;

    double predictOne(const std::vector<double>& row) const {
        const std::vector<double> xs = stdzr.apply(row);
        switch (kind) {
            case RegressorKind::Linear:
            case RegressorKind::Ridge: {
                double s = interceptValue;
                for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * xs[j];
                return s;
            }
            case RegressorKind::RbfKernelRidge: {
                double s = interceptValue;
                for (std::size_t i = 0; i < trainRows.size(); ++i) {
                    double d2 = 0.0;
                    for (std::size_t j = 0; j < xs.size(); ++j) {
                        const double d = xs[j] - trainRows[i][j];
                        d2 += d * d;
                    }
                    s += dual[i] * std::exp(-gamma * d2);
                }
                return s;
            }
            case RegressorKind::Forest: {
                double s = 0.0;
                for (const auto& t : trees) s += t.predict(xs);
                return s / static_cast<double>(trees.size());
            }
        }
        return interceptValue;
    }
};

Regressor Regressor::fit(const std::vector<std::vector<double>>& features,
                         const std::vector<double>& targets, const RegressorOptions& options) {
    if (features.empty() || features.size() != targets.size()) {
        throw ValidationError("fit_regressor: bad training shape");
    }
    const std::size_t n = features.size();
    const std::size_t p = features.front().size();
    if (p == 0) throw ValidationError("fit_regressor: no features");

    auto impl = std::make_shared<Impl>();
    impl->kind = options.kind;
    impl->stdzr.fit(features);

    std::vector<std::vector<double>> Xs;
    Xs.reserve(n);
    for (const auto& row : features) Xs.push_back(impl->stdzr.apply(row));

    const double yMean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(n);
    impl->interceptValue = yMean;
    std::vector<double> yc(n);
    for (std::size_t i = 0; i < n; ++i) yc[i] = targets[i] - yMean;

    switch (options.kind) {
        case RegressorKind::Linear:
        case RegressorKind::Ridge: {
            const double lambda = options.kind == RegressorKind::Ridge ? options.ridgeLambda : 0.0;
            std::vector<std::vector<double>> A(p, std::vector<double>(p, 0.0));
            std::vector<double> b(p, 0.0);
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t i = 0; i < p; ++i) {
                    b[i] += Xs[r][i] * yc[r];
                    for (std::size_t j = 0; j <= i; ++j) A[i][j] += Xs[r][i] * Xs[r][j];
                }
            }
            for (std::size_t i = 0; i < p; ++i) {
                for (std::size_t j = i + 1; j < p; ++j) A[i][j] = A[j][i];
                A[i][i] += lambda;
            }
            if (!choleskySolve(A, b, impl->weights)) {
                for (std::size_t i = 0; i < p; ++i) A[i][i] += 1e-8;
                impl->ridgeFallback = true;
                if (!choleskySolve(A, b, impl->weights)) {
                    throw AlgorithmError("linear regressor: normal equations unsolvable");
                }
            }
            break;
        }
        case RegressorKind::RbfKernelRidge: {
            impl->gamma = options.rbfGamma > 0.0 ? options.rbfGamma : 1.0 / static_cast<double>(p);
            impl->trainRows = Xs;
            std::vector<std::vector<double>> K(n, std::vector<double>(n, 0.0));
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j <= i; ++j) {
                    double d2 = 0.0;
                    for (std::size_t k = 0; k < p; ++k) {
                        const double d = Xs[i][k] - Xs[j][k];
                        d2 += d * d;
                    }
                    K[i][j] = K[j][i] = std::exp(-impl->gamma * d2);
                }
                K[i][i] += options.kernelLambda;
            }
            if (!choleskySolve(K, yc, impl->dual)) {
                throw AlgorithmError("kernel ridge: gram matrix not positive definite");
            }
            break;
        }
        case RegressorKind::Forest: {
            const int maxFeatures =
                static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))));
            impl->trees.resize(options.forestTrees);
            impl->interceptValue = 0.0;  // trees carry the level directly
            for (int t = 0; t < options.forestTrees; ++t) {
                Rng rng = Rng::forStream(options.seed, static_cast<std::uint64_t>(t));
                std::vector<int> boot(n);
                for (auto& b : boot) b = static_cast<int>(rng.index(n));
                impl->trees[t].fit(Xs, targets, boot, rng.nextU64(), maxFeatures);
            }
            break;
        }
    }

    Regressor out;
    out.impl_ = std::move(impl);
    return out;
}

double Regressor::predict(const std::vector<double>& row) const {
    return impl_->predictOne(row);
}

std::vector<double> Regressor::predict(const std::vector<std::vector<double>>& rows) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(impl_->predictOne(r));
    return out;
}

bool Regressor::usedRidgeFallback() const {
    return impl_->ridgeFallback;
}

void RegressionTree::fit(const std::vector<std::vector<double>>& features,
                         const std::vector<double>& targets, const std::vector<int>& sampleIndices,
                         std::uint64_t seed, int maxFeatures) {
    nodes_.clear();
    std::vector<int> idx = sampleIndices;
    if (idx.empty()) throw ValidationError("tree fit: no samples");
    Rng rng(seed);
    const int p = static_cast<int>(features.front().size());
    const int mf = maxFeatures <= 0 ? p : std::min(maxFeatures, p);
    build(features, targets, idx, 0, static_cast<int>(idx.size()), rng, mf);
}

int RegressionTree::build(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                          std::vector<int>& idx, int lo, int hi, Rng& rng, int maxFeatures) {
    const int nodeId = static_cast<int>(nodes_.size());
    nodes_.push_back({});

    double mean = 0.0;
    for (int i = lo; i < hi; ++i) mean += y[idx[i]];
    mean /= static_cast<double>(hi - lo);
    nodes_[nodeId].value = mean;

    bool pure = true;
    for (int i = lo + 1; i < hi; ++i) {
        if (y[idx[i]] != y[idx[lo]]) {
            pure = false;
            break;
        }
    }
    if (hi - lo < 2 || pure) return nodeId;

    // Random feature subset, scanned in ascending order for determinism.
    const int p = static_cast<int>(X.front().size());
    std::vector<int> feats(p);
    std::iota(feats.begin(), feats.end(), 0);
    for (int k = 0; k < maxFeatures; ++k) {
        const std::size_t pick = k + rng.index(p - k);
        std::swap(feats[k], feats[pick]);
    }
    feats.resize(maxFeatures);
    std::sort(feats.begin(), feats.end());

    int bestFeature = -1;
    double bestThreshold = 0.0;
    double bestScore = std::numeric_limits<double>::infinity();

    std::vector<std::pair<double, int>> order;
    order.reserve(hi - lo);
    for (int f : feats) {
        order.clear();
        for (int i = lo; i < hi; ++i) order.push_back({X[idx[i]][f], idx[i]});
        std::sort(order.begin(), order.end());

        const int m = static_cast<int>(order.size());
        double sumL = 0.0, sqL = 0.0;
        double sumR = 0.0, sqR = 0.0;
        for (const auto& [v, i] : order) {
            (void)v;
            sumR += y[i];
            sqR += y[i] * y[i];
        }
        for (int k = 0; k < m - 1; ++k) {
            const double yi = y[order[k].second];
            sumL += yi;
            sqL += yi * yi;
            sumR -= yi;
            sqR -= yi * yi;
            if (order[k].first == order[k + 1].first) continue;
            const double nL = k + 1;
            const double nR = m - k - 1;
            const double sse = (sqL - sumL * sumL / nL) + (sqR - sumR * sumR / nR);
            if (sse < bestScore) {
                bestScore = sse;
                bestFeature = f;
                bestThreshold = 0.5 * (order[k].first + order[k + 1].first);
            }
        }
    }
    if (bestFeature < 0) return nodeId;

    const auto mid = std::stable_partition(idx.begin() + lo, idx.begin() + hi, [&](int i) {
        return X[i][bestFeature] <= bestThreshold;
    });
    const int cut = static_cast<int>(mid - idx.begin());
    if (cut == lo || cut == hi) return nodeId;

    nodes_[nodeId].feature = bestFeature;
    nodes_[nodeId].threshold = bestThreshold;
    const int left = build(X, y, idx, lo, cut, rng, maxFeatures);
    nodes_[nodeId].left = left;
    const int right = build(X, y, idx, cut, hi, rng, maxFeatures);
    nodes_[nodeId].right = right;
    return nodeId;
}

double RegressionTree::predict(const std::vector<double>& row) const {
    int cur = 0;
    while (nodes_[cur].feature >= 0) {
        cur = row[nodes_[cur].feature] <= nodes_[cur].threshold ? nodes_[cur].left : nodes_[cur].right;
    }
    return nodes_[cur].value;
}

} // namespace perturblearn
