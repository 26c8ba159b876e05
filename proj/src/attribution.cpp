#include "ccshap/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ccshap/errors.hpp"
#include "ccshap/parallel.hpp"
#include "ccshap/util.hpp"

namespace ccshap {

// ---------------------------------------------------------------- weights

ContextWeight shapley_weight(std::size_t subset_size, std::size_t n_features) {
    if (n_features == 0 || subset_size >= n_features)
        throw ArgumentError("subset size " + std::to_string(subset_size) + " out of range for " +
                            std::to_string(n_features) + " features");
    // |S|!(n-|S|-1)!/n! = 1 / (n * C(n-1, |S|))
    std::int64_t binom = 1;
    for (std::size_t i = 1; i <= subset_size; ++i)
        binom = binom * static_cast<std::int64_t>(n_features - subset_size - 1 + i) / static_cast<std::int64_t>(i);
    ContextWeight w;
    w.subset_size = subset_size;
    w.n_features = n_features;
    w.exact = Rational(1, static_cast<std::int64_t>(n_features) * binom);
    w.value = boost::rational_cast<double>(w.exact);
    return w;
}

std::string to_string(const Rational& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

std::string to_string(ImportanceMode mode) {
    switch (mode) {
    case ImportanceMode::Observational: return "observational";
    case ImportanceMode::Interventional: return "interventional";
    case ImportanceMode::ShortcutLemma1: return "lemma1";
    case ImportanceMode::ShortcutLemma2: return "lemma2";
    case ImportanceMode::BackdoorAdjusted: return "backdoor";
    }
    return "?";
}

std::string to_string(AttributionMethod method) {
    return method == AttributionMethod::Shapley ? "shapley" : "cc-shapley";
}

std::string format_context(const NodeSet& s) {
    return "{" + join(std::vector<std::string>(s.begin(), s.end()), ";") + "}";
}

// ---------------------------------------------------------------- pairs

struct BackdoorTerms {
    std::string xj;
    std::vector<std::string> w;
    // Reference draws of (xj, W) from the fit data, row-major over (xj, w...).
    std::vector<double> xj_values;
    std::vector<std::vector<double>> w_values;  // [k][row]
    // Equal-width bins on xj (or exact values for discrete data) with their member rows.
    bool exact_values = false;
    double lo = 0.0;
    double width = 1.0;
    std::vector<double> keys;
    std::vector<std::vector<std::size_t>> members;
    std::vector<std::size_t> all;

    std::size_t bin_of(double x) const {
        if (exact_values) {
            const auto it = std::lower_bound(keys.begin(), keys.end(), x);
            if (it == keys.end()) return keys.size() - 1;
            if (it != keys.begin() && std::abs(*(it - 1) - x) < std::abs(*it - x)) return (it - keys.begin()) - 1;
            return static_cast<std::size_t>(it - keys.begin());
        }
        const double pos = std::floor((x - lo) / width);
        return static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(keys.size() - 1)));
    }
};

namespace {

constexpr std::size_t kBackdoorReference = 2000;

std::vector<std::size_t> spread(const std::vector<std::size_t>& rows, std::size_t cap) {
    if (rows.size() <= cap) return rows;
    std::vector<std::size_t> out;
    out.reserve(cap);
    for (std::size_t i = 0; i < cap; ++i) out.push_back(rows[i * rows.size() / cap]);
    return out;
}

std::vector<double> backdoor_evaluate(const ImportancePair& p, const Dataset& rows) {
    const auto& t = *p.backdoor;
    const auto& with = *p.model_with;
    const auto& without = *p.model_without;
    // Locate each model input among eval columns or reference W columns.
    auto layout = [&](const FittedModel& m) {
        std::vector<std::pair<bool, std::size_t>> src;  // (from reference W, index)
        for (const auto& in : m.inputs()) {
            const auto it = std::ranges::find(t.w, in);
            if (it != t.w.end())
                src.emplace_back(true, static_cast<std::size_t>(it - t.w.begin()));
            else
                src.emplace_back(false, rows.index_of(in));
        }
        return src;
    };
    const auto with_src = layout(with);
    const auto without_src = layout(without);
    const auto xj_col = rows.index_of(t.xj);

    std::vector<double> out(rows.rows());
    parallel_for(rows.rows(), [&](std::size_t r) {
        std::vector<double> x;
        auto average = [&](const FittedModel& m, const auto& src, const std::vector<std::size_t>& refs) {
            double acc = 0.0;
            x.resize(src.size());
            for (auto k : refs) {
                for (std::size_t i = 0; i < src.size(); ++i)
                    x[i] = src[i].first ? t.w_values[src[i].second][k] : rows.at(r, src[i].second);
                acc += m.predict(x);
            }
            return acc / static_cast<double>(refs.size());
        };
        auto bin = t.bin_of(rows.at(r, xj_col));
        // Nearest non-empty bin.
        for (std::size_t step = 0; t.members[bin].empty() && step < t.members.size(); ++step) {
            if (bin + step < t.members.size() && !t.members[bin + step].empty()) bin += step;
            else if (bin >= step && !t.members[bin - step].empty()) bin -= step;
        }
        out[r] = average(with, with_src, t.members[bin]) - average(without, without_src, t.all);
    });
    return out;
}

CausalGraph without_outgoing(const CausalGraph& g, const NodeSet& s) {
    std::vector<Edge> edges;
    for (auto& e : g.edges())
        if (!s.contains(e.parent)) edges.push_back(e);
    return CausalGraph(g.nodes(), edges, g.target());
}

} // namespace

std::vector<double> ImportancePair::evaluate(const Dataset& rows) const {
    if (backdoor && !backdoor->w.empty()) return backdoor_evaluate(*this, rows);
    auto with = model_with->predict(rows);
    const auto without = model_without->predict(rows);
    for (std::size_t r = 0; r < with.size(); ++r) with[r] -= without[r];
    return with;
}

// ---------------------------------------------------------------- results

const std::vector<double>& AttributionResult::phi_of(std::string_view feature) const {
    const auto it = std::ranges::find(features, feature);
    if (it == features.end()) throw IdentifierError("no attribution for feature '" + std::string(feature) + "'");
    return phi[static_cast<std::size_t>(it - features.begin())];
}

double AttributionResult::recomposition_error() const {
    double worst = 0.0;
    for (std::size_t k = 0; k < features.size(); ++k) {
        std::vector<double> sum(eval.rows(), 0.0);
        for (const auto& t : terms) {
            if (t.feature != features[k]) continue;
            for (std::size_t r = 0; r < sum.size(); ++r) sum[r] += t.weight.value * t.values[r];
        }
        for (std::size_t r = 0; r < sum.size(); ++r) worst = std::max(worst, std::abs(sum[r] - phi[k][r]));
    }
    return worst;
}

std::vector<const ContextTerm*> AttributionResult::terms_of(std::string_view feature) const {
    std::vector<const ContextTerm*> out;
    for (const auto& t : terms)
        if (t.feature == feature) out.push_back(&t);
    return out;
}

// ---------------------------------------------------------------- Attributor

Attributor::Attributor(Dataset fit_data, std::string target, std::vector<std::string> features,
                       AttributionOptions options)
    : data_(std::move(fit_data)), target_(std::move(target)), features_(std::move(features)),
      options_(std::move(options)) {
    data_.index_of(target_);
    if (features_.empty())
        for (const auto& n : data_.names())
            if (n != target_) features_.push_back(n);
    for (const auto& f : features_) {
        data_.index_of(f);
        if (f == target_) throw ArgumentError("the target cannot be a feature");
    }
    if (features_.size() > options_.feature_cap || features_.size() > 30)
        throw ResourceError(std::to_string(features_.size()) + " features exceed the cap of " +
                            std::to_string(options_.feature_cap));
    if (data_.rows() == 0) throw ArgumentError("fit data is empty");
}

Attributor::Attributor(Scm scm, AttributionOptions options)
    : target_(scm.graph().target()), features_(scm.graph().features()), options_(std::move(options)),
      scm_(std::move(scm)) {
    if (features_.size() > options_.feature_cap || features_.size() > 30)
        throw ResourceError(std::to_string(features_.size()) + " features exceed the cap of " +
                            std::to_string(options_.feature_cap));
    if (options_.n_fit == 0) throw ArgumentError("n_fit must be positive");
    data_ = scm_->sample(options_.n_fit, derive_seed(options_.seed, "observational"));
}

const Scm& Attributor::scm() const {
    if (!scm_) throw PreconditionError("interventional importance needs an SCM");
    return *scm_;
}

std::size_t Attributor::feature_index(std::string_view name) const {
    const auto it = std::ranges::find(features_, name);
    if (it == features_.end()) throw IdentifierError("'" + std::string(name) + "' is not a feature");
    return static_cast<std::size_t>(it - features_.begin());
}

Attributor::Mask Attributor::mask_of(const NodeSet& s) const {
    Mask m = 0;
    for (const auto& n : s) m |= Mask{1} << feature_index(n);
    return m;
}

NodeSet Attributor::set_of(Mask m) const {
    NodeSet s;
    for (std::size_t k = 0; k < features_.size(); ++k)
        if (m >> k & 1U) s.insert(features_[k]);
    return s;
}

std::vector<std::string> Attributor::inputs_of(Mask m) const {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < features_.size(); ++k)
        if (m >> k & 1U) out.push_back(features_[k]);
    return out;
}

void Attributor::check_pair_args(const std::string& xj, const NodeSet& s) const {
    feature_index(xj);
    for (const auto& n : s) feature_index(n);
    if (s.contains(xj)) throw ArgumentError("feature '" + xj + "' is part of its own context");
}

std::shared_ptr<const FittedModel> Attributor::obs_model(Mask m) {
    {
        std::lock_guard lock(mutex_);
        if (const auto it = obs_cache_.find(m); it != obs_cache_.end()) return it->second;
    }
    auto model = std::make_shared<const FittedModel>(fit(options_.spec, data_, inputs_of(m), target_));
    std::lock_guard lock(mutex_);
    return obs_cache_.emplace(m, std::move(model)).first->second;
}

void Attributor::fit_do_models(Mask s, const std::vector<std::size_t>& with) {
    std::vector<Mask> missing;
    {
        std::lock_guard lock(mutex_);
        if (!do_cache_.contains({s, s})) missing.push_back(s);
        for (auto j : with)
            if (!do_cache_.contains({s, s | Mask{1} << j})) missing.push_back(s | Mask{1} << j);
    }
    if (missing.empty()) return;
    const auto& m = scm();
    const NodeSet context = set_of(s);
    auto q = marginal_sampler(m, context, options_.pool, derive_seed(options_.seed, "do-pool", s), options_.marginal);
    const Scm intervened = m.intervene_stochastic(context, std::move(q));
    const Dataset sample = intervened.sample(options_.n_fit, derive_seed(options_.seed, "do-sample", s));
    std::vector<std::shared_ptr<const FittedModel>> models;
    for (auto inputs : missing)
        models.push_back(std::make_shared<const FittedModel>(fit(options_.spec, sample, inputs_of(inputs), target_)));
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < missing.size(); ++i) do_cache_.emplace(std::pair{s, missing[i]}, models[i]);
}

std::shared_ptr<const FittedModel> Attributor::do_model(Mask s, Mask inputs) {
    std::lock_guard lock(mutex_);
    return do_cache_.at({s, inputs});
}

ImportancePair Attributor::importance_obs(const std::string& xj, const NodeSet& s) {
    check_pair_args(xj, s);
    const Mask m = mask_of(s);
    const Mask j = Mask{1} << feature_index(xj);
    return ImportancePair{xj, s, ImportanceMode::Observational, obs_model(m | j), obs_model(m), nullptr};
}

ImportancePair Attributor::importance_do(const std::string& xj, const NodeSet& s) {
    check_pair_args(xj, s);
    const Mask m = mask_of(s);
    if (m == 0) return importance_obs(xj, s);
    const auto j = feature_index(xj);
    fit_do_models(m, {j});
    return ImportancePair{xj, s, ImportanceMode::Interventional, do_model(m, m | Mask{1} << j), do_model(m, m),
                          nullptr};
}

ImportanceMode Attributor::plan_mode(const std::string& xj, const NodeSet& s) const {
    if (s.empty()) return ImportanceMode::Observational;
    if (!options_.use_shortcuts) return ImportanceMode::Interventional;
    const auto& g = scm().graph();
    if (lemma1_applies(g, xj, s)) return ImportanceMode::ShortcutLemma1;
    if (lemma2_applies(g, xj, s)) return ImportanceMode::ShortcutLemma2;
    return ImportanceMode::Interventional;
}

ImportancePair Attributor::importance_do_with_shortcuts(const std::string& xj, const NodeSet& s) {
    check_pair_args(xj, s);
    const auto mode = plan_mode(xj, s);
    if (mode == ImportanceMode::ShortcutLemma1) {
        auto p = importance_obs(xj, {});
        p.context = s;
        p.mode = mode;
        return p;
    }
    if (mode == ImportanceMode::ShortcutLemma2) {
        auto p = importance_obs(xj, s);
        p.mode = mode;
        return p;
    }
    return importance_do(xj, s);
}

ImportancePair Attributor::backdoor_importance(const CausalGraph& g, const std::string& xj, const NodeSet& s,
                                               const NodeSet& w) {
    check_pair_args(xj, s);
    for (const auto& n : w) {
        feature_index(n);
        if (n == xj || s.contains(n)) throw ArgumentError("adjustment set overlaps the feature or its context");
    }
    NodeSet reach = w;
    reach.insert(xj);
    const auto desc = descendants(g, s);
    for (const auto& n : reach) {
        if (!desc.contains(n)) continue;
        for (const auto& from : s)
            for (const auto& p : enumerate_paths(g, from, n)) {
                if (std::ranges::all_of(p.steps, [](Step st) { return st == Step::Forward; }))
                    throw PreconditionError("causal path from the context into the adjustment: " + p.to_string());
            }
    }
    if (!s.empty()) {
        const auto cut = without_outgoing(g, s);
        for (const auto& z : {w, reach}) {
            if (d_separated(cut, s, {g.target()}, z)) continue;
            for (const auto& from : s)
                for (const auto& p : backdoor_paths(g, {from}, {g.target()}))
                    if (!is_blocked(cut, p, z))
                        throw PreconditionError("backdoor path not blocked by " + format_context(z) + ": " +
                                                p.to_string());
            throw PreconditionError("adjustment set " + format_context(z) + " leaves a backdoor path open");
        }
    }

    const Mask sm = mask_of(s);
    const Mask wm = mask_of(w);
    const Mask j = Mask{1} << feature_index(xj);
    ImportancePair p{xj, s, ImportanceMode::BackdoorAdjusted, obs_model(sm | wm | j), obs_model(sm | wm), nullptr};

    auto t = std::make_shared<BackdoorTerms>();
    t->xj = xj;
    t->w.assign(w.begin(), w.end());
    const auto& xcol = data_.column(data_.index_of(xj));
    std::vector<std::size_t> rows(data_.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    t->all = spread(rows, kBackdoorReference);
    t->xj_values = xcol;
    for (const auto& n : t->w) t->w_values.push_back(data_.column(data_.index_of(n)));
    if (options_.spec.kind == EstimatorKind::DiscreteCpt) {
        t->exact_values = true;
        t->keys = xcol;
        std::ranges::sort(t->keys);
        t->keys.erase(std::unique(t->keys.begin(), t->keys.end()), t->keys.end());
    } else {
        const auto [lo, hi] = std::ranges::minmax(xcol);
        const auto bins = static_cast<std::size_t>(options_.spec.bins_for(1));
        t->lo = lo;
        t->width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
        t->keys.resize(bins);
    }
    std::vector<std::vector<std::size_t>> members(t->keys.size());
    for (auto r : rows) members[t->bin_of(xcol[r])].push_back(r);
    for (auto& m : members) t->members.push_back(spread(m, kBackdoorReference));
    p.backdoor = std::move(t);
    return p;
}

// ---------------------------------------------------------------- bulk

AttributionResult Attributor::assemble(AttributionMethod method, const Dataset& eval,
                                       const std::vector<std::vector<ImportanceMode>>& modes) {
    const std::size_t n = features_.size();
    const Mask full = (Mask{1} << n) - 1;
    for (const auto& f : features_) eval.index_of(f);

    // Which models each (feature, context) needs.
    std::vector<Mask> obs_needed;
    std::map<Mask, std::vector<std::size_t>> do_needed;
    for (std::size_t j = 0; j < n; ++j) {
        const Mask bit = Mask{1} << j;
        for (Mask s = 0; s <= full; ++s) {
            if (s & bit) continue;
            switch (modes[j][s]) {
            case ImportanceMode::ShortcutLemma1:
                obs_needed.push_back(bit);
                obs_needed.push_back(0);
                break;
            case ImportanceMode::Interventional:
                do_needed[s].push_back(j);
                break;
            default:
                obs_needed.push_back(s | bit);
                obs_needed.push_back(s);
            }
        }
    }
    std::ranges::sort(obs_needed);
    obs_needed.erase(std::unique(obs_needed.begin(), obs_needed.end()), obs_needed.end());

    std::vector<std::vector<double>> obs_pred(obs_needed.size());
    parallel_for(obs_needed.size(), [&](std::size_t i) { obs_pred[i] = obs_model(obs_needed[i])->predict(eval); });
    auto obs_of = [&](Mask m) -> const std::vector<double>& {
        return obs_pred[static_cast<std::size_t>(std::ranges::lower_bound(obs_needed, m) - obs_needed.begin())];
    };

    std::vector<std::pair<Mask, std::vector<std::size_t>>> contexts(do_needed.begin(), do_needed.end());
    std::vector<std::map<Mask, std::vector<double>>> do_pred(contexts.size());
    parallel_for(contexts.size(), [&](std::size_t i) {
        const auto& [s, js] = contexts[i];
        fit_do_models(s, js);
        do_pred[i][s] = do_model(s, s)->predict(eval);
        for (auto j : js) do_pred[i][s | Mask{1} << j] = do_model(s, s | Mask{1} << j)->predict(eval);
    });
    auto do_of = [&](Mask s, Mask inputs) -> const std::vector<double>& {
        const auto it = std::ranges::lower_bound(contexts, s, {}, &std::pair<Mask, std::vector<std::size_t>>::first);
        return do_pred[static_cast<std::size_t>(it - contexts.begin())].at(inputs);
    };

    AttributionResult result;
    result.method = method;
    result.target = target_;
    result.features = features_;
    result.eval = eval;
    result.phi.assign(n, std::vector<double>(eval.rows(), 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        const Mask bit = Mask{1} << j;
        for (Mask s = 0; s <= full; ++s) {
            if (s & bit) continue;
            ContextTerm term;
            term.feature = features_[j];
            term.context = set_of(s);
            term.weight = shapley_weight(static_cast<std::size_t>(std::popcount(s)), n);
            term.mode = modes[j][s];
            const std::vector<double>* with = nullptr;
            const std::vector<double>* without = nullptr;
            switch (term.mode) {
            case ImportanceMode::ShortcutLemma1:
                with = &obs_of(bit);
                without = &obs_of(0);
                break;
            case ImportanceMode::Interventional:
                with = &do_of(s, s | bit);
                without = &do_of(s, s);
                break;
            default:
                with = &obs_of(s | bit);
                without = &obs_of(s);
            }
            term.values.resize(eval.rows());
            for (std::size_t r = 0; r < eval.rows(); ++r) {
                term.values[r] = (*with)[r] - (*without)[r];
                result.phi[j][r] += term.weight.value * term.values[r];
            }
            result.terms.push_back(std::move(term));
        }
    }
    return result;
}

AttributionResult Attributor::shapley_values(const Dataset& eval) {
    const std::size_t n = features_.size();
    std::vector<std::vector<ImportanceMode>> modes(n, std::vector<ImportanceMode>(std::size_t{1} << n,
                                                                                  ImportanceMode::Observational));
    return assemble(AttributionMethod::Shapley, eval, modes);
}

AttributionResult Attributor::cc_shapley_values(const Dataset& eval) {
    scm();
    const std::size_t n = features_.size();
    std::vector<std::vector<ImportanceMode>> modes(n, std::vector<ImportanceMode>(std::size_t{1} << n));
    for (std::size_t j = 0; j < n; ++j)
        for (Mask s = 0; s < (Mask{1} << n); ++s)
            if (!(s >> j & 1U)) modes[j][s] = plan_mode(features_[j], set_of(s));
    return assemble(AttributionMethod::CcShapley, eval, modes);
}

AttributionResult shapley_values(const Dataset& fit_data, const std::string& target, const Dataset& eval,
                                 const AttributionOptions& options) {
    Attributor a(fit_data, target, {}, options);
    return a.shapley_values(eval);
}

AttributionResult cc_shapley_values(const Scm& m, const Dataset& eval, const AttributionOptions& options) {
    Attributor a(m, options);
    return a.cc_shapley_values(eval);
}

// ---------------------------------------------------------------- SAP

bool SapReport::passed() const {
    return std::ranges::all_of(checked, [](const SapEntry& e) { return e.passed; });
}

std::string SapReport::to_string() const {
    std::ostringstream os;
    if (checked.empty()) os << "no feature is d-separated from the target\n";
    for (const auto& e : checked)
        os << e.feature << ": mean|phi_cc| = " << format_double(e.mean_abs_phi) << " (tolerance "
           << format_double(tolerance) << ", separated under every context: "
           << (e.separated_under_every_context ? "yes" : "no") << ") " << (e.passed ? "PASS" : "FAIL") << '\n';
    return os.str();
}

SapReport sap_check(const AttributionResult& result, const CausalGraph& g, double tolerance) {
    if (result.method != AttributionMethod::CcShapley) throw ArgumentError("sap_check expects cc-Shapley values");
    SapReport report;
    report.tolerance = tolerance;
    const auto& target = g.target();
    for (std::size_t k = 0; k < result.features.size(); ++k) {
        const auto& f = result.features[k];
        if (!d_separated(g, {f}, {target}, {})) continue;
        SapEntry e;
        e.feature = f;
        e.independent = true;
        std::vector<std::string> others;
        for (const auto& o : result.features)
            if (o != f) others.push_back(o);
        e.separated_under_every_context = true;
        for (std::uint32_t m = 0; m < (std::uint32_t{1} << others.size()) && e.separated_under_every_context; ++m) {
            NodeSet s;
            for (std::size_t i = 0; i < others.size(); ++i)
                if (m >> i & 1U) s.insert(others[i]);
            e.separated_under_every_context = d_separated(do_surgery(g, s), {f}, {target}, s);
        }
        double acc = 0.0;
        for (double v : result.phi[k]) acc += std::abs(v);
        e.mean_abs_phi = result.phi[k].empty() ? 0.0 : acc / static_cast<double>(result.phi[k].size());
        e.passed = e.mean_abs_phi <= tolerance;
        report.checked.push_back(std::move(e));
    }
    return report;
}

// ---------------------------------------------------------------- export

void write_attributions_csv(const std::vector<const AttributionResult*>& results, std::ostream& out) {
    out << "row_id,feature,mode,phi,feature_value\n";
    for (const auto* res : results) {
        std::vector<std::size_t> cols;
        for (const auto& f : res->features) cols.push_back(res->eval.index_of(f));
        for (std::size_t r = 0; r < res->eval.rows(); ++r)
            for (std::size_t k = 0; k < res->features.size(); ++k)
                out << r << ',' << res->features[k] << ',' << to_string(res->method) << ','
                    << format_double(res->phi[k][r]) << ',' << format_double(res->eval.at(r, cols[k])) << '\n';
    }
}

void write_contexts_csv(const std::vector<const AttributionResult*>& results, std::ostream& out, bool per_row) {
    out << (per_row ? "method,feature,context,mode,weight,weight_value,row_id,importance\n"
                    : "method,feature,context,mode,weight,weight_value,mean_importance,mean_abs_importance\n");
    for (const auto* res : results) {
        for (const auto& t : res->terms) {
            const auto prefix = to_string(res->method) + ',' + t.feature + ',' + format_context(t.context) + ',' +
                                to_string(t.mode) + ',' + to_string(t.weight.exact) + ',' +
                                format_double(t.weight.value) + ',';
            if (per_row) {
                for (std::size_t r = 0; r < t.values.size(); ++r)
                    out << prefix << r << ',' << format_double(t.values[r]) << '\n';
            } else {
                double sum = 0.0;
                double abs_sum = 0.0;
                for (double v : t.values) {
                    sum += v;
                    abs_sum += std::abs(v);
                }
                const double n = t.values.empty() ? 1.0 : static_cast<double>(t.values.size());
                out << prefix << format_double(sum / n) << ',' << format_double(abs_sum / n) << '\n';
            }
        }
    }
}

void write_plan(const std::vector<const AttributionResult*>& results, std::ostream& out) {
    for (const auto* res : results) {
        out << "# " << to_string(res->method) << " (target " << res->target << ", " << res->features.size()
            << " features)\n";
        for (const auto& t : res->terms)
            out << t.feature << ' ' << format_context(t.context) << ' ' << to_string(t.mode) << ' '
                << to_string(t.weight.exact) << '\n';
    }
}

} // namespace ccshap
