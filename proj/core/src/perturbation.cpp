#include "perturblearn/perturbation.hpp"

#include "perturblearn/errors.hpp"
#include "perturblearn/rng.hpp"

#include <cmath>

namespace perturblearn {

StandardizeResult standardizeColumns(const std::vector<std::vector<double>>& raw) {
    if (raw.empty()) throw ValidationError("standardize: empty matrix");
    const std::size_t cols = raw.front().size();
    const std::size_t n = raw.size();

    StandardizeResult out;
    out.scales.assign(cols, 1.0);
    out.inert.assign(cols, 0);

    for (std::size_t j = 0; j < cols; ++j) {
        double lo = raw[0][j], hi = raw[0][j];
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double v = raw[r][j];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            mean += v;
        }
        mean /= static_cast<double>(n);
        if (lo == hi || n < 2) {
            out.inert[j] = 1;
            continue;
        }
        double ssd = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double d = raw[r][j] - mean;
            ssd += d * d;
        }
        out.scales[j] = std::sqrt(ssd / static_cast<double>(n - 1));
    }

    out.scaled.assign(n, std::vector<double>(cols, 0.0));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < cols; ++j) {
            out.scaled[r][j] = raw[r][j] / out.scales[j];
        }
    }
    return out;
}

PerturbationDataset runPerturbations(const ScmSpec& spec, const PerturbConfig& cfg) {
    if (cfg.rangeB <= 0.0) throw ValidationError("perturbation range B must be positive");
    if (cfg.samplesPerLatent < 1) throw ValidationError("samples_per_latent must be >= 1");
    spec.validate();

    const ScmModel model(spec);
    const int d = spec.latentDim;
    const int spl = cfg.samplesPerLatent;

    PerturbationDataset ds;
    ds.attrNames = spec.attributeNames;
    ds.latentDim = d;
    ds.records.resize(static_cast<std::size_t>(d) * spl);

    std::vector<std::vector<double>> rawDeltas(ds.records.size());

    for (int i = 0; i < d; ++i) {
        Rng rng = Rng::forStream(cfg.seed, static_cast<std::uint64_t>(i));
        for (int s = 0; s < spl; ++s) {
            LatentVector z(d);
            for (auto& v : z) v = rng.normal();
            LatentVector zt = z;
            zt[i] = rng.uniform(-cfg.rangeB, cfg.rangeB);

            const AttributeVector a = model.evaluate(z);
            const AttributeVector at = model.evaluate(zt);

            const std::size_t idx = static_cast<std::size_t>(i) * spl + s;
            auto& rec = ds.records[idx];
            rec.sampleId = static_cast<std::int64_t>(idx);
            rec.latentIndex = i;
            rec.latentDelta = z[i] - zt[i];
            auto& da = rawDeltas[idx];
            da.resize(a.size());
            for (std::size_t k = 0; k < a.size(); ++k) da[k] = a[k] - at[k];
        }
    }

    StandardizeResult std = standardizeColumns(rawDeltas);
    ds.attrScales = std::move(std.scales);
    ds.inertAttrs = std::move(std.inert);
    for (std::size_t r = 0; r < ds.records.size(); ++r) {
        ds.records[r].attrDeltas = std::move(std.scaled[r]);
    }
    return ds;
}

} // namespace perturblearn
