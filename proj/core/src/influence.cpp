#include "perturblearn/influence.hpp"

#include "perturblearn/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace perturblearn {

namespace {

double softThreshold(double value, double threshold) {
    if (value > threshold) return value - threshold;
    if (value < -threshold) return value + threshold;
    return 0.0;
}

} // namespace

LassoResult lasso(const std::vector<std::vector<double>>& rows,
                  const std::vector<double>& target, const LassoConfig& cfg) {
    const std::size_t n = rows.size();
    if (n == 0 || target.size() != n) throw ValidationError("lasso: bad problem shape");
    const std::size_t p = rows.front().size();
    if (p == 0) throw ValidationError("lasso: no features");
    if (cfg.alpha < 0.0 || cfg.tol <= 0.0 || cfg.maxIters < 1) {
        throw ValidationError("lasso: invalid config");
    }

    // Column-major copy for the sweep.
    std::vector<std::vector<double>> cols(p, std::vector<double>(n));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < p; ++j) cols[j][r] = rows[r][j];
    }

    const double invN = 1.0 / static_cast<double>(n);
    std::vector<double> colNorm(p, 0.0);  // (1/n) x_j . x_j
    for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (double v : cols[j]) s += v * v;
        colNorm[j] = s * invN;
    }

    LassoResult res;
    res.coeffs.assign(p, 0.0);
    std::vector<double> residual = target;

    int iter = 0;
    bool hitTol = false;
    for (; iter < cfg.maxIters; ++iter) {
        double maxChange = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            if (colNorm[j] == 0.0) continue;
            double dot = 0.0;
            const auto& xj = cols[j];
            for (std::size_t r = 0; r < n; ++r) dot += xj[r] * residual[r];
            const double rho = dot * invN + colNorm[j] * res.coeffs[j];
            const double next = softThreshold(rho, cfg.alpha) / colNorm[j];
            const double change = next - res.coeffs[j];
            if (change != 0.0) {
                for (std::size_t r = 0; r < n; ++r) residual[r] -= change * xj[r];
                res.coeffs[j] = next;
                maxChange = std::max(maxChange, std::abs(change));
            }
        }
        if (maxChange <= cfg.tol) {
            ++iter;
            hitTol = true;
            break;
        }
    }
    res.iterations = iter;

    // Stationarity certificate: for w_j = 0, |c_j| <= alpha; otherwise
    // c_j = alpha * sign(w_j), where c_j = (1/n) x_j . residual.
    double violation = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        if (colNorm[j] == 0.0) continue;
        double dot = 0.0;
        for (std::size_t r = 0; r < n; ++r) dot += cols[j][r] * residual[r];
        const double c = dot * invN;
        if (res.coeffs[j] == 0.0) {
            violation = std::max(violation, std::abs(c) - cfg.alpha);
        } else {
            violation = std::max(violation, std::abs(c - cfg.alpha * (res.coeffs[j] > 0 ? 1.0 : -1.0)));
        }
    }
    res.kktViolation = std::max(violation, 0.0);
    res.converged = hitTol || res.kktViolation <= cfg.tol;
    return res;
}

InfluenceMatrix fitInfluence(const PerturbationDataset& ds, const LassoConfig& cfg, int threads) {
    if (ds.records.empty()) throw ValidationError("fit_influence: empty dataset");
    const int d = ds.latentDim;
    const int nAttrs = static_cast<int>(ds.attrNames.size());

    InfluenceMatrix W;
    W.attrNames = ds.attrNames;
    W.latentIndices.resize(d);
    for (int i = 0; i < d; ++i) W.latentIndices[i] = i;
    W.values.assign(nAttrs, std::vector<double>(d, 0.0));
    W.columnInfo.assign(d, {});

    // Row index ranges per latent.
    std::vector<std::vector<std::size_t>> byLatent(d);
    for (std::size_t r = 0; r < ds.records.size(); ++r) {
        const int li = ds.records[r].latentIndex;
        if (li < 0 || li >= d) throw ValidationError("fit_influence: record latent index out of range");
        byLatent[li].push_back(r);
    }

    const auto fitColumn = [&](int i) {
        const auto& idx = byLatent[i];
        if (idx.empty()) return;  // all-zero column
        std::vector<std::vector<double>> X;
        X.reserve(idx.size());
        std::vector<double> y;
        y.reserve(idx.size());
        for (std::size_t r : idx) {
            X.push_back(ds.records[r].attrDeltas);
            y.push_back(ds.records[r].latentDelta);
        }
        const LassoResult res = lasso(X, y, cfg);
        for (int k = 0; k < nAttrs; ++k) W.values[k][i] = res.coeffs[k];
        W.columnInfo[i].converged = res.converged;
        W.columnInfo[i].kktViolation = res.kktViolation;
    };

    int nThreads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    nThreads = std::max(1, std::min(nThreads, d));
    if (nThreads == 1) {
        for (int i = 0; i < d; ++i) fitColumn(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(nThreads);
        for (int t = 0; t < nThreads; ++t) {
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < d; i = next.fetch_add(1)) fitColumn(i);
            });
        }
        for (auto& th : pool) th.join();
    }
    return W;
}

} // namespace perturblearn
