#pragma once

#include "perturblearn/graph.hpp"
#include "perturblearn/influence.hpp"
#include "perturblearn/perturbation.hpp"
#include "perturblearn/regress.hpp"
#include "perturblearn/scm.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace perturblearn {

enum class FeatureSetKind { AllProps, Blanket, BlanketPlusLatents, FullZ };

std::string featureSetKindName(FeatureSetKind kind);
FeatureSetKind featureSetKindFromName(const std::string& name);

struct FeatureSet {
    FeatureSetKind kind = FeatureSetKind::AllProps;
    std::vector<std::string> attrNames;
    std::vector<int> latentIndices;

    int size() const { return static_cast<int>(attrNames.size() + latentIndices.size()); }
};

// all_props: every attribute except the target. blanket: the target's Markov
// blanket attributes. blanket_plus_latents: blanket attributes plus the
// target's direct latent channels. full_z: the entire latent embedding.
FeatureSet buildFeatureSet(FeatureSetKind kind, const ScmSpec& spec, const CausalGraph& graph,
                           const std::string& target);

// mean((ln(1 + max(prediction, 0)) - ln(1 + target))^2); targets must be
// nonnegative, lengths equal and >= 1.
double msle(const std::vector<double>& predictions, const std::vector<double>& targets);

struct SplitSpec {
    std::string name;
    std::string profile;   // empty: base coefficients
    int samples = 1000;
    std::uint64_t seed = 0;
};

struct SplitData {
    std::vector<std::vector<double>> latents;  // n x d
    std::vector<std::vector<double>> attrs;    // n x |A|
    std::vector<double> targets;               // y = exp(a_target), positive
};

SplitData generateSplit(const ScmSpec& spec, const SplitSpec& split, const std::string& target);

enum class EvalSetting { Retrain, Transfer };

struct EvalProtocol {
    EvalSetting setting = EvalSetting::Transfer;
    int nTrain = 10;
    int repeats = 100;
    double holdoutFraction = 0.1;
    std::uint64_t seed = 0;
};

struct EvalRow {
    std::string featureSet;
    std::string split;
    std::string setting;    // "retrain" | "transfer"
    std::string regressor;
    double alpha = 0.0;
    double delta = 0.0;
    double msleMean = 0.0;
    double msleStd = 0.0;
    int nFeat = 0;
};

struct EvalReport {
    std::vector<EvalRow> rows;
};

// Regressors are trained on ln(target) and predictions mapped back through
// exp, so MSLE compares log-scale fits; the target itself is the positive
// exp-transformed attribute value.
//
// retrain: per split and feature set, `repeats` times draw n_train rows, fit,
// score MSLE on the remainder; report mean/std. transfer: fit once on the
// first (base) split minus its holdout tail, score the base holdout and every
// other split in full. Deterministic given seeds; cells use independent
// derived streams.
EvalReport runProtocol(const ScmSpec& spec, const CausalGraph& graph, const std::string& target,
                       const std::vector<SplitSpec>& splits, const EvalProtocol& protocol,
                       const std::vector<FeatureSetKind>& kinds, const RegressorOptions& regressor,
                       double alphaTag = 0.0, double deltaTag = 0.0);

struct SelectionGrid {
    std::vector<double> alphas{0.0001, 0.0005, 0.001, 0.002};
    std::vector<double> deltas{0.1, 0.2, 0.25, 0.35};
    std::vector<RegressorKind> regressors{RegressorKind::Linear, RegressorKind::Forest,
                                          RegressorKind::RbfKernelRidge};
};

struct FeatureSetChoice {
    FeatureSetKind kind = FeatureSetKind::AllProps;
    double alpha = 0.0;
    double delta = 0.0;
    RegressorKind transferRegressor = RegressorKind::Linear;
    RegressorKind retrainRegressor = RegressorKind::Linear;
    double transferHoldoutMsle = 0.0;
    double retrainMsle = 0.0;
};

struct SelectionResult {
    std::vector<FeatureSetChoice> choices;  // one per feature set kind
    EvalReport report;                      // transfer rows + retrain rows for the chosen models
};

// The three-step procedure: (1) per feature set, pick (alpha, delta,
// regressor) minimizing transfer MSLE on the base-split holdout, ties broken
// by grid order; (2) record transfer performance of the chosen models on the
// remaining splits; (3) keep each feature set's graph fixed and pick the
// retrain regressor kind minimizing base-split retrain MSLE. Grid cells whose
// graph learning fails (cycle) are skipped.
SelectionResult selectModels(const ScmSpec& spec, const std::string& target,
                             const PerturbConfig& perturbCfg, const LassoConfig& lassoCfg,
                             const SelectionGrid& grid, const std::vector<SplitSpec>& splits,
                             const EvalProtocol& protocol);

} // namespace perturblearn
