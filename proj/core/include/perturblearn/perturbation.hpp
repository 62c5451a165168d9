#pragma once

#include "perturblearn/scm.hpp"

#include <cstdint>
#include <vector>

namespace perturblearn {

struct PerturbConfig {
    double rangeB = 3.0;       // resample half-width: z~_i uniform on [-B, B]
    int samplesPerLatent = 1;
    std::uint64_t seed = 0;
};

struct PerturbationRecord {
    std::int64_t sampleId = 0;
    int latentIndex = 0;
    double latentDelta = 0.0;            // dz = z_i - z~_i
    std::vector<double> attrDeltas;      // standardized da, aligned with attrNames
};

struct PerturbationDataset {
    std::vector<std::string> attrNames;
    int latentDim = 0;
    std::vector<PerturbationRecord> records;
    std::vector<double> attrScales;      // divisor applied per attribute column
    std::vector<std::uint8_t> inertAttrs; // 1 when the raw column was constant
};

struct StandardizeResult {
    std::vector<std::vector<double>> scaled;
    std::vector<double> scales;
    std::vector<std::uint8_t> inert;
};

// Divides each column by its sample standard deviation (n-1 denominator).
// Constant columns keep scale 1 and are flagged inert. No centering: deltas
// are sign-symmetric by construction.
StandardizeResult standardizeColumns(const std::vector<std::vector<double>>& raw);

// One latent dimension at a time: draw a fresh base z, resample coordinate i
// uniformly on [-B, B], record dz and the attribute-delta vector, then
// standardize the delta columns dataset-wide. Deterministic given (spec, cfg);
// per-latent substreams keep the output independent of generation order.
PerturbationDataset runPerturbations(const ScmSpec& spec, const PerturbConfig& cfg);

} // namespace perturblearn
