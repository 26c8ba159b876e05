#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "ccshap/dataset.hpp"
#include "ccshap/estimators.hpp"
#include "ccshap/graph.hpp"
#include "ccshap/rng.hpp"
#include "ccshap/scm.hpp"

namespace ccshap {

using Rational = boost::rational<std::int64_t>;

struct ContextWeight {
    std::size_t subset_size = 0;
    std::size_t n_features = 0;
    Rational exact;
    double value = 0.0;
};

/// |S|! (n - |S| - 1)! / n!, exactly.
ContextWeight shapley_weight(std::size_t subset_size, std::size_t n_features);
std::string to_string(const Rational& r);

enum class ImportanceMode { Observational, Interventional, ShortcutLemma1, ShortcutLemma2, BackdoorAdjusted };
std::string to_string(ImportanceMode mode);

struct BackdoorTerms;

/// The two conditional-expectation models behind one importance term
/// I(xj) = E[Y | xj, context] - E[Y | context].
struct ImportancePair {
    std::string feature;
    NodeSet context;
    ImportanceMode mode = ImportanceMode::Observational;
    std::shared_ptr<const FittedModel> model_with;
    std::shared_ptr<const FittedModel> model_without;
    /// Present only for BackdoorAdjusted pairs.
    std::shared_ptr<const BackdoorTerms> backdoor;

    /// One value per row of `rows`, which must hold the model inputs.
    std::vector<double> evaluate(const Dataset& rows) const;
};

struct AttributionOptions {
    EstimatorSpec spec;
    std::size_t n_fit = 200000;
    std::uint64_t seed = kDefaultSeed;
    bool use_shortcuts = true;
    std::size_t feature_cap = 12;
    std::size_t pool = kDefaultPool;
    MarginalKind marginal = MarginalKind::Joint;
};

enum class AttributionMethod { Shapley, CcShapley };
std::string to_string(AttributionMethod method);

struct ContextTerm {
    std::string feature;
    NodeSet context;
    ContextWeight weight;
    ImportanceMode mode = ImportanceMode::Observational;
    std::vector<double> values;  // per evaluation row
};

struct AttributionResult {
    AttributionMethod method = AttributionMethod::Shapley;
    std::string target;
    std::vector<std::string> features;
    Dataset eval;
    /// phi[k][r] for features[k] at evaluation row r.
    std::vector<std::vector<double>> phi;
    std::vector<ContextTerm> terms;

    const std::vector<double>& phi_of(std::string_view feature) const;
    /// Largest |phi - sum(weight * I)| over all rows and features.
    double recomposition_error() const;
    std::vector<const ContextTerm*> terms_of(std::string_view feature) const;
};

/// Fits and caches the conditional-expectation models needed for Shapley
/// and cc-Shapley values. Observational models are fitted on one dataset;
/// interventional models on samples of the stochastically intervened SCM.
class Attributor {
public:
    /// Observational only: fit data, target and features (default: every other column).
    Attributor(Dataset fit_data, std::string target, std::vector<std::string> features, AttributionOptions options);
    /// Samples the observational fit data from the SCM.
    Attributor(Scm scm, AttributionOptions options);

    const Dataset& fit_data() const noexcept { return data_; }
    const std::vector<std::string>& features() const noexcept { return features_; }
    const std::string& target() const noexcept { return target_; }
    const AttributionOptions& options() const noexcept { return options_; }
    bool has_scm() const noexcept { return scm_.has_value(); }
    const Scm& scm() const;

    ImportancePair importance_obs(const std::string& xj, const NodeSet& s);
    /// Algorithm: sample the joint marginal of s, intervene, sample, fit both models.
    ImportancePair importance_do(const std::string& xj, const NodeSet& s);
    ImportancePair importance_do_with_shortcuts(const std::string& xj, const NodeSet& s);
    /// Adjustment over w using the observational fit data. Throws
    /// PreconditionError naming the offending path when g violates the premises.
    ImportancePair backdoor_importance(const CausalGraph& g, const std::string& xj, const NodeSet& s,
                                       const NodeSet& w);

    /// Mode used for (xj, s) by cc-Shapley under the current options.
    ImportanceMode plan_mode(const std::string& xj, const NodeSet& s) const;

    AttributionResult shapley_values(const Dataset& eval);
    AttributionResult cc_shapley_values(const Dataset& eval);

private:
    using Mask = std::uint32_t;
    Mask mask_of(const NodeSet& s) const;
    NodeSet set_of(Mask m) const;
    std::vector<std::string> inputs_of(Mask m) const;
    std::size_t feature_index(std::string_view name) const;
    void check_pair_args(const std::string& xj, const NodeSet& s) const;

    std::shared_ptr<const FittedModel> obs_model(Mask m);
    /// Fits E[Y | s] and E[Y | s, xj] for every xj in `with` on one intervened sample.
    void fit_do_models(Mask s, const std::vector<std::size_t>& with);
    std::shared_ptr<const FittedModel> do_model(Mask s, Mask inputs);

    AttributionResult assemble(AttributionMethod method, const Dataset& eval,
                               const std::vector<std::vector<ImportanceMode>>& modes);

    Dataset data_;
    std::string target_;
    std::vector<std::string> features_;
    AttributionOptions options_;
    std::optional<Scm> scm_;

    std::mutex mutex_;
    std::map<Mask, std::shared_ptr<const FittedModel>> obs_cache_;
    std::map<std::pair<Mask, Mask>, std::shared_ptr<const FittedModel>> do_cache_;
};

/// Convenience wrappers.
AttributionResult shapley_values(const Dataset& fit_data, const std::string& target, const Dataset& eval,
                                 const AttributionOptions& options);
AttributionResult cc_shapley_values(const Scm& m, const Dataset& eval, const AttributionOptions& options);

struct SapEntry {
    std::string feature;
    /// d-separated from the target given the empty set.
    bool independent = false;
    /// Also separated from the target under every interventional context.
    bool separated_under_every_context = false;
    double mean_abs_phi = 0.0;
    bool passed = true;
};

struct SapReport {
    double tolerance = 0.0;
    std::vector<SapEntry> checked;
    bool passed() const;
    std::string to_string() const;
};

/// Checks mean |phi_cc| <= tolerance for every feature d-separated from the target.
SapReport sap_check(const AttributionResult& result, const CausalGraph& g, double tolerance);

/// Long format: row_id,feature,mode,phi,feature_value.
void write_attributions_csv(const std::vector<const AttributionResult*>& results, std::ostream& out);
/// Per-row: method,feature,context,mode,weight,weight_value,row_id,importance.
/// Summary: method,feature,context,mode,weight,weight_value,mean_importance,mean_abs_importance.
void write_contexts_csv(const std::vector<const AttributionResult*>& results, std::ostream& out, bool per_row);
/// One line per (method, feature, context): mode and weight.
void write_plan(const std::vector<const AttributionResult*>& results, std::ostream& out);

std::string format_context(const NodeSet& s);

} // namespace ccshap
