#include "perturblearn/eval.hpp"

#include "perturblearn/errors.hpp"
#include "perturblearn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace perturblearn {

std::string featureSetKindName(FeatureSetKind kind) {
    switch (kind) {
        case FeatureSetKind::AllProps: return "all_props";
        case FeatureSetKind::Blanket: return "blanket";
        case FeatureSetKind::BlanketPlusLatents: return "blanket_plus_latents";
        case FeatureSetKind::FullZ: return "full_z";
    }
    return "unknown";
}

FeatureSetKind featureSetKindFromName(const std::string& name) {
    if (name == "all_props") return FeatureSetKind::AllProps;
    if (name == "blanket") return FeatureSetKind::Blanket;
    if (name == "blanket_plus_latents") return FeatureSetKind::BlanketPlusLatents;
    if (name == "full_z") return FeatureSetKind::FullZ;
    throw ValidationError("unknown feature set kind: " + name);
}

FeatureSet buildFeatureSet(FeatureSetKind kind, const ScmSpec& spec, const CausalGraph& graph,
                           const std::string& target) {
    if (spec.attributeIndex(target) < 0) throw ValidationError("unknown target attribute: " + target);
    FeatureSet fs;
    fs.kind = kind;
    switch (kind) {
        case FeatureSetKind::AllProps:
            for (const auto& name : spec.attributeNames) {
                if (name != target) fs.attrNames.push_back(name);
            }
            break;
        case FeatureSetKind::Blanket: {
            fs.attrNames = markovBlanket(graph, target).blanketAttrs;
            break;
        }
        case FeatureSetKind::BlanketPlusLatents: {
            const BlanketResult b = markovBlanket(graph, target);
            fs.attrNames = b.blanketAttrs;
            fs.latentIndices = b.directLatents;
            break;
        }
        case FeatureSetKind::FullZ:
            for (int i = 0; i < spec.latentDim; ++i) fs.latentIndices.push_back(i);
            break;
    }
    return fs;
}

double msle(const std::vector<double>& predictions, const std::vector<double>& targets) {
    if (predictions.size() != targets.size() || predictions.empty()) {
        throw ValidationError("msle: length mismatch or empty input");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] < 0.0) throw ValidationError("msle: negative target");
        const double p = std::max(predictions[i], 0.0);
        const double d = std::log1p(p) - std::log1p(targets[i]);
        s += d * d;
    }
    return s / static_cast<double>(targets.size());
}

SplitData generateSplit(const ScmSpec& spec, const SplitSpec& split, const std::string& target) {
    const int t = spec.attributeIndex(target);
    if (t < 0) throw ValidationError("unknown target attribute: " + target);
    if (split.samples < 1) throw ValidationError("split samples must be >= 1");

    const ScmModel model(spec, split.profile);
    Rng rng(split.seed);

    SplitData out;
    out.latents.reserve(split.samples);
    out.attrs.reserve(split.samples);
    out.targets.reserve(split.samples);
    for (int i = 0; i < split.samples; ++i) {
        LatentVector z(spec.latentDim);
        for (auto& v : z) v = rng.normal();
        AttributeVector a = model.evaluate(z);
        out.targets.push_back(std::exp(a[t]));
        out.latents.push_back(std::move(z));
        out.attrs.push_back(std::move(a));
    }
    return out;
}

namespace {

std::vector<std::vector<double>> featureMatrix(const FeatureSet& fs, const ScmSpec& spec,
                                               const SplitData& data,
                                               const std::vector<int>* rowsSubset = nullptr) {
    std::vector<int> attrIdx;
    attrIdx.reserve(fs.attrNames.size());
    for (const auto& name : fs.attrNames) {
        const int i = spec.attributeIndex(name);
        if (i < 0) throw ValidationError("feature set references unknown attribute: " + name);
        attrIdx.push_back(i);
    }
    for (int li : fs.latentIndices) {
        if (li < 0 || li >= spec.latentDim) throw ValidationError("feature set latent out of range");
    }

    const std::size_t n = rowsSubset ? rowsSubset->size() : data.attrs.size();
    std::vector<std::vector<double>> X(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t r = rowsSubset ? static_cast<std::size_t>((*rowsSubset)[k]) : k;
        auto& row = X[k];
        row.reserve(attrIdx.size() + fs.latentIndices.size());
        for (int i : attrIdx) row.push_back(data.attrs[r][i]);
        for (int li : fs.latentIndices) row.push_back(data.latents[r][li]);
    }
    return X;
}

std::vector<double> logTargets(const std::vector<double>& y, const std::vector<int>* rows = nullptr) {
    const std::size_t n = rows ? rows->size() : y.size();
    std::vector<double> u(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double v = rows ? y[(*rows)[k]] : y[k];
        u[k] = std::log(std::max(v, std::numeric_limits<double>::min()));
    }
    return u;
}

std::vector<double> predictBack(const Regressor& model, const std::vector<std::vector<double>>& X) {
    std::vector<double> yhat = model.predict(X);
    for (auto& v : yhat) v = std::exp(std::min(v, 700.0));
    return yhat;
}

std::vector<double> subsetTargets(const std::vector<double>& y, const std::vector<int>& rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (int r : rows) out.push_back(y[r]);
    return out;
}

} // namespace

EvalReport runProtocol(const ScmSpec& spec, const CausalGraph& graph, const std::string& target,
                       const std::vector<SplitSpec>& splits, const EvalProtocol& protocol,
                       const std::vector<FeatureSetKind>& kinds, const RegressorOptions& regressor,
                       double alphaTag, double deltaTag) {
    if (splits.empty()) throw ValidationError("run_protocol: no splits");
    if (protocol.repeats < 1) throw ValidationError("run_protocol: repeats must be >= 1");
    if (protocol.holdoutFraction <= 0.0 || protocol.holdoutFraction >= 1.0) {
        throw ValidationError("run_protocol: holdout_fraction must be in (0, 1)");
    }

    std::vector<SplitData> data;
    data.reserve(splits.size());
    for (const auto& s : splits) data.push_back(generateSplit(spec, s, target));

    EvalReport report;
    const std::string settingName = protocol.setting == EvalSetting::Retrain ? "retrain" : "transfer";

    for (std::size_t f = 0; f < kinds.size(); ++f) {
        const FeatureSet fs = buildFeatureSet(kinds[f], spec, graph, target);
        if (fs.size() == 0) throw ValidationError("empty feature set: " + featureSetKindName(kinds[f]));

        if (protocol.setting == EvalSetting::Transfer) {
            const int nBase = static_cast<int>(data[0].targets.size());
            const int holdout = std::max(1, static_cast<int>(std::ceil(protocol.holdoutFraction * nBase)));
            if (holdout >= nBase) throw ValidationError("transfer: base split too small for holdout");

            std::vector<int> trainRows(nBase - holdout);
            std::iota(trainRows.begin(), trainRows.end(), 0);
            std::vector<int> holdRows(holdout);
            std::iota(holdRows.begin(), holdRows.end(), nBase - holdout);

            const Regressor model = Regressor::fit(featureMatrix(fs, spec, data[0], &trainRows),
                                                   logTargets(data[0].targets, &trainRows), regressor);

            for (std::size_t s = 0; s < splits.size(); ++s) {
                std::vector<double> yhat;
                std::vector<double> y;
                if (s == 0) {
                    yhat = predictBack(model, featureMatrix(fs, spec, data[0], &holdRows));
                    y = subsetTargets(data[0].targets, holdRows);
                } else {
                    yhat = predictBack(model, featureMatrix(fs, spec, data[s]));
                    y = data[s].targets;
                }
                report.rows.push_back({featureSetKindName(kinds[f]), splits[s].name, settingName,
                                       regressorKindName(regressor.kind), alphaTag, deltaTag,
                                       msle(yhat, y), 0.0, fs.size()});
            }
        } else {
            for (std::size_t s = 0; s < splits.size(); ++s) {
                const int n = static_cast<int>(data[s].targets.size());
                if (n < protocol.nTrain + 1) {
                    throw ValidationError("retrain: split '" + splits[s].name +
                                          "' smaller than n_train + 1");
                }
                std::vector<double> scores;
                scores.reserve(protocol.repeats);
                for (int rep = 0; rep < protocol.repeats; ++rep) {
                    Rng rng = Rng::forStream(protocol.seed,
                                             (static_cast<std::uint64_t>(s) << 40) ^
                                                 (static_cast<std::uint64_t>(f) << 32) ^
                                                 static_cast<std::uint64_t>(rep));
                    std::vector<int> perm(n);
                    std::iota(perm.begin(), perm.end(), 0);
                    for (int k = 0; k < protocol.nTrain; ++k) {
                        const std::size_t pick = k + rng.index(n - k);
                        std::swap(perm[k], perm[pick]);
                    }
                    std::vector<int> trainRows(perm.begin(), perm.begin() + protocol.nTrain);
                    std::vector<int> testRows(perm.begin() + protocol.nTrain, perm.end());
                    std::sort(testRows.begin(), testRows.end());

                    RegressorOptions opts = regressor;
                    opts.seed = rng.nextU64();
                    const Regressor model =
                        Regressor::fit(featureMatrix(fs, spec, data[s], &trainRows),
                                       logTargets(data[s].targets, &trainRows), opts);
                    const std::vector<double> yhat =
                        predictBack(model, featureMatrix(fs, spec, data[s], &testRows));
                    scores.push_back(msle(yhat, subsetTargets(data[s].targets, testRows)));
                }
                const double mean =
                    std::accumulate(scores.begin(), scores.end(), 0.0) / scores.size();
                double sd = 0.0;
                if (scores.size() > 1) {
                    for (double v : scores) sd += (v - mean) * (v - mean);
                    sd = std::sqrt(sd / static_cast<double>(scores.size() - 1));
                }
                report.rows.push_back({featureSetKindName(kinds[f]), splits[s].name, settingName,
                                       regressorKindName(regressor.kind), alphaTag, deltaTag, mean,
                                       sd, fs.size()});
            }
        }
    }
    return report;
}

SelectionResult selectModels(const ScmSpec& spec, const std::string& target,
                             const PerturbConfig& perturbCfg, const LassoConfig& lassoCfg,
                             const SelectionGrid& grid, const std::vector<SplitSpec>& splits,
                             const EvalProtocol& protocol) {
    if (grid.alphas.empty() || grid.deltas.empty() || grid.regressors.empty()) {
        throw ValidationError("select_models: empty grid");
    }
    if (splits.empty()) throw ValidationError("select_models: no splits");

    const std::vector<FeatureSetKind> kinds{FeatureSetKind::AllProps, FeatureSetKind::Blanket,
                                            FeatureSetKind::BlanketPlusLatents, FeatureSetKind::FullZ};

    // Perturbations depend on neither alpha nor delta; graphs only on both.
    const PerturbationDataset ds = runPerturbations(spec, perturbCfg);

    struct GraphCell {
        double alpha;
        double delta;
        CausalGraph graph;
        bool valid = false;
    };
    std::vector<GraphCell> cells;
    for (double alpha : grid.alphas) {
        LassoConfig lc = lassoCfg;
        lc.alpha = alpha;
        const InfluenceMatrix W = fitInfluence(ds, lc);
        for (double delta : grid.deltas) {
            GraphCell cell{alpha, delta, {}, false};
            try {
                cell.graph = learnGraph(thresholdMatrix(W, {delta}));
                cell.valid = true;
            } catch (const AlgorithmError&) {
                // Cycle at this (alpha, delta); the grid search routes around it.
            }
            cells.push_back(std::move(cell));
        }
    }

    const std::vector<SplitSpec> baseOnly{splits.front()};
    EvalProtocol transferProto = protocol;
    transferProto.setting = EvalSetting::Transfer;

    SelectionResult out;
    for (FeatureSetKind kind : kinds) {
        FeatureSetChoice choice;
        choice.kind = kind;
        double best = std::numeric_limits<double>::infinity();
        const CausalGraph* bestGraph = nullptr;

        for (const auto& cell : cells) {
            if (!cell.valid) continue;
            for (RegressorKind reg : grid.regressors) {
                RegressorOptions opts;
                opts.kind = reg;
                opts.seed = protocol.seed;
                double score;
                try {
                    const EvalReport r = runProtocol(spec, cell.graph, target, baseOnly,
                                                     transferProto, {kind}, opts, cell.alpha,
                                                     cell.delta);
                    score = r.rows.front().msleMean;
                } catch (const ValidationError&) {
                    continue;  // e.g. empty blanket at this threshold
                }
                if (score < best) {
                    best = score;
                    bestGraph = &cell.graph;
                    choice.alpha = cell.alpha;
                    choice.delta = cell.delta;
                    choice.transferRegressor = reg;
                    choice.transferHoldoutMsle = score;
                }
            }
        }
        if (bestGraph == nullptr) {
            throw AlgorithmError("select_models: no usable grid cell for feature set " +
                                 featureSetKindName(kind));
        }

        // Step 2: transfer performance of the chosen model on every split.
        {
            RegressorOptions opts;
            opts.kind = choice.transferRegressor;
            opts.seed = protocol.seed;
            const EvalReport r = runProtocol(spec, *bestGraph, target, splits, transferProto,
                                             {kind}, opts, choice.alpha, choice.delta);
            out.report.rows.insert(out.report.rows.end(), r.rows.begin(), r.rows.end());
        }

        // Step 3: graph fixed, retrain regressor chosen on the base split.
        EvalProtocol retrainProto = protocol;
        retrainProto.setting = EvalSetting::Retrain;
        double bestRetrain = std::numeric_limits<double>::infinity();
        for (RegressorKind reg : grid.regressors) {
            RegressorOptions opts;
            opts.kind = reg;
            opts.seed = protocol.seed;
            const EvalReport r = runProtocol(spec, *bestGraph, target, baseOnly, retrainProto,
                                             {kind}, opts, choice.alpha, choice.delta);
            if (r.rows.front().msleMean < bestRetrain) {
                bestRetrain = r.rows.front().msleMean;
                choice.retrainRegressor = reg;
                choice.retrainMsle = bestRetrain;
            }
        }
        {
            RegressorOptions opts;
            opts.kind = choice.retrainRegressor;
            opts.seed = protocol.seed;
            const EvalReport r = runProtocol(spec, *bestGraph, target, splits, retrainProto,
                                             {kind}, opts, choice.alpha, choice.delta);
            out.report.rows.insert(out.report.rows.end(), r.rows.begin(), r.rows.end());
        }

        out.choices.push_back(choice);
    }
    return out;
}

} // namespace perturblearn
