#pragma once

#include "perturblearn/perturbation.hpp"

#include <string>
#include <vector>

namespace perturblearn {

struct LassoConfig {
    double alpha = 0.001;   // L1 strength, objective (1/2n)||y - Xw||^2 + alpha*||w||_1
    int maxIters = 10000;
    double tol = 1e-8;      // convergence: max coefficient change per sweep
};

struct LassoResult {
    std::vector<double> coeffs;
    bool converged = true;
    double kktViolation = 0.0;  // worst stationarity-condition excess at exit
    int iterations = 0;
};

// Cyclic coordinate descent with soft-thresholding. No intercept; feature
// columns are used as given. Non-convergence is reported in the result, not
// thrown: the coefficients at exit are still returned.
LassoResult lasso(const std::vector<std::vector<double>>& rows,
                  const std::vector<double>& target, const LassoConfig& cfg);

struct InfluenceColumnInfo {
    bool converged = true;
    double kktViolation = 0.0;
};

// |A| x |Z| weight matrix; rows are attribute names, columns latent indices.
struct InfluenceMatrix {
    std::vector<std::string> attrNames;
    std::vector<int> latentIndices;              // column labels
    std::vector<std::vector<double>> values;     // [row][col]
    std::vector<InfluenceColumnInfo> columnInfo; // per column

    int rowCount() const { return static_cast<int>(attrNames.size()); }
    int colCount() const { return static_cast<int>(latentIndices.size()); }
};

// One Lasso per latent index: features are the standardized attribute deltas
// of that latent's records, the target is dz. Latents with no records yield
// all-zero columns. Columns are independent and fitted in parallel; assembly
// order is fixed, so the result does not depend on thread scheduling.
InfluenceMatrix fitInfluence(const PerturbationDataset& ds, const LassoConfig& cfg,
                             int threads = 0);

} // namespace perturblearn
