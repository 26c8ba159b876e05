#include "ccshap/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "ccshap/errors.hpp"
#include "ccshap/expression.hpp"
#include "ccshap/util.hpp"

namespace ccshap {

// -------------------------------------------------------------- EstimatorSpec

EstimatorSpec EstimatorSpec::linear(double ridge) {
    EstimatorSpec s;
    s.kind = EstimatorKind::LinearLeastSquares;
    s.ridge = ridge;
    s.validate();
    return s;
}

EstimatorSpec EstimatorSpec::discrete() {
    EstimatorSpec s;
    s.kind = EstimatorKind::DiscreteCpt;
    return s;
}

EstimatorSpec EstimatorSpec::binned(int bins, int smoothing) {
    EstimatorSpec s;
    s.kind = EstimatorKind::BinnedNonparametric;
    s.bins = bins;
    s.smoothing = smoothing;
    s.validate();
    return s;
}

EstimatorSpec EstimatorSpec::parse(std::string_view text) {
    const auto parts = split(trim(text), ':');
    const auto& kind = parts.front();
    auto integer = [&](const std::string& s) {
        const double v = parse_double(s, "estimator parameter");
        if (v != std::floor(v)) throw ParseError("estimator parameter '" + s + "' must be an integer");
        return static_cast<int>(v);
    };
    try {
        if (kind == "linear") {
            if (parts.size() > 2) throw ParseError("linear estimator takes at most one parameter");
            return linear(parts.size() == 2 ? parse_double(parts[1], "ridge") : 1e-8);
        }
        if (kind == "cpt" || kind == "discrete") {
            if (parts.size() > 1) throw ParseError("cpt estimator takes no parameters");
            return discrete();
        }
        if (kind == "binned") {
            if (parts.size() > 3) throw ParseError("binned estimator takes at most two parameters");
            return binned(parts.size() >= 2 ? integer(parts[1]) : 0, parts.size() == 3 ? integer(parts[2]) : -1);
        }
    } catch (const ArgumentError& e) {
        throw ParseError(e.what());
    }
    throw ParseError("unknown estimator '" + std::string(text) + "' (expected linear, cpt or binned)");
}

std::string EstimatorSpec::to_string() const {
    switch (kind) {
    case EstimatorKind::LinearLeastSquares: return "linear:" + format_double(ridge);
    case EstimatorKind::DiscreteCpt: return "cpt";
    case EstimatorKind::BinnedNonparametric:
        return "binned:" + std::to_string(bins) + ":" + std::to_string(smoothing);
    }
    return "?";
}

int EstimatorSpec::bins_for(std::size_t n_inputs) const {
    if (bins > 0) return bins;
    if (n_inputs <= 2) return 32;
    if (n_inputs == 3) return 12;
    return 6;
}

int EstimatorSpec::radius_for(std::size_t n_inputs) const {
    if (smoothing >= 0) return smoothing;
    const int b = bins_for(n_inputs);
    return std::max(1, static_cast<int>(std::lround(b / 12.0)));
}

void EstimatorSpec::validate() const {
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw ArgumentError("ridge must be >= 0");
    if (bins != 0 && bins < 2) throw ArgumentError("bins per dimension must be >= 2");
    if (smoothing < -1) throw ArgumentError("smoothing radius must be >= 0");
}

// ---------------------------------------------------------------- fitting

namespace {

constexpr std::size_t kMaxDenseCells = std::size_t{1} << 22;
constexpr int kMaxSmoothedDims = 4;

std::vector<std::pair<double, double>> empirical_distribution(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < values.size();) {
        std::size_t j = i;
        while (j < values.size() && values[j] == values[i]) ++j;
        out.emplace_back(values[i], static_cast<double>(j - i) / static_cast<double>(values.size()));
        i = j;
    }
    return out;
}

struct LocalFit {
    std::size_t dims;
    bool logistic;
    double lo;
    double hi;
};

// One neighbour contribution: offset from the center cell, kernel-weighted
// count and kernel-weighted target sum.
struct Neighbour {
    std::vector<double> offset;
    double n;
    double s;
};

double local_estimate(const LocalFit& cfg, const std::vector<Neighbour>& nb) {
    const auto p = cfg.dims + 1;
    double total_n = 0.0;
    double total_s = 0.0;
    for (const auto& q : nb) {
        total_n += q.n;
        total_s += q.s;
    }
    const double pooled = total_s / total_n;
    if (nb.size() <= cfg.dims) return std::clamp(pooled, cfg.lo, cfg.hi);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    const double ridge = 1e-3;
    auto design = [&](const Neighbour& q, Eigen::Index k) { return k == 0 ? 1.0 : q.offset[k - 1]; };

    if (!cfg.logistic) {
        Eigen::MatrixXd h = ridge * Eigen::MatrixXd::Identity(p, p);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
        for (const auto& q : nb) {
            const double mean = q.s / q.n;
            for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(p); ++a) {
                g(a) += q.n * mean * design(q, a);
                for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(p); ++b)
                    h(a, b) += q.n * design(q, a) * design(q, b);
            }
        }
        beta = h.ldlt().solve(g);
        const double v = beta(0);
        return std::isfinite(v) ? std::clamp(v, cfg.lo, cfg.hi) : std::clamp(pooled, cfg.lo, cfg.hi);
    }

    // Local logistic regression by Newton iterations on the binomial likelihood.
    const double p0 = (total_s + 0.5) / (total_n + 1.0);
    beta(0) = std::log(p0 / (1.0 - p0));
    for (int it = 0; it < 30; ++it) {
        Eigen::MatrixXd h = ridge * Eigen::MatrixXd::Identity(p, p);
        Eigen::VectorXd g = -ridge * beta;
        for (const auto& q : nb) {
            double eta = beta(0);
            for (std::size_t k = 0; k < cfg.dims; ++k) eta += beta(static_cast<Eigen::Index>(k + 1)) * q.offset[k];
            const double mu = sigmoid(eta);
            const double w = q.n * mu * (1.0 - mu);
            for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(p); ++a) {
                g(a) += (q.s - q.n * mu) * design(q, a);
                for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(p); ++b)
                    h(a, b) += w * design(q, a) * design(q, b);
            }
        }
        const Eigen::VectorXd step = h.ldlt().solve(g);
        if (!step.allFinite()) break;
        beta += step;
        if (step.cwiseAbs().maxCoeff() < 1e-10) break;
    }
    const double v = sigmoid(beta(0));
    return std::isfinite(v) ? std::clamp(v, cfg.lo, cfg.hi) : std::clamp(pooled, cfg.lo, cfg.hi);
}

} // namespace

FittedModel fit(const EstimatorSpec& spec, const Dataset& d, const std::vector<std::string>& inputs,
                const std::string& target, std::span<const std::size_t> rows, bool with_distributions) {
    spec.validate();
    std::vector<std::size_t> all_rows;
    if (rows.empty()) {
        all_rows.resize(d.rows());
        std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
        rows = all_rows;
    }
    if (rows.empty()) throw FitError("cannot fit E[" + target + " | ...]: no usable rows");

    const auto& y_col = d.column(d.index_of(target));
    std::vector<const std::vector<double>*> x_cols;
    for (const auto& in : inputs) {
        if (in == target) throw ArgumentError("input '" + in + "' equals the target");
        x_cols.push_back(&d.column(d.index_of(in)));
    }
    const std::size_t n = rows.size();
    const std::size_t dims = inputs.size();

    FittedModel m;
    m.spec_ = spec;
    m.inputs_ = inputs;
    m.target_ = target;
    m.training_rows_ = n;
    double y_sum = 0.0;
    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -y_min;
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        ys[i] = y_col[rows[i]];
        y_sum += ys[i];
        y_min = std::min(y_min, ys[i]);
        y_max = std::max(y_max, ys[i]);
    }
    m.fallback_ = y_sum / static_cast<double>(n);

    if (dims == 0) {
        m.params_ = FittedModel::Constant{spec.kind == EstimatorKind::DiscreteCpt && with_distributions
                                              ? empirical_distribution(ys)
                                                                                  : std::vector<std::pair<double, double>>{}};
        return m;
    }

    switch (spec.kind) {
    case EstimatorKind::LinearLeastSquares: {
        // Centered normal equations; the intercept is recovered afterwards and never penalized.
        std::vector<double> mean_x(dims, 0.0);
        for (std::size_t k = 0; k < dims; ++k) {
            for (auto r : rows) mean_x[k] += (*x_cols[k])[r];
            mean_x[k] /= static_cast<double>(n);
        }
        Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(dims, dims);
        Eigen::VectorXd xty = Eigen::VectorXd::Zero(dims);
        std::vector<double> xc(dims);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < dims; ++k) xc[k] = (*x_cols[k])[rows[i]] - mean_x[k];
            const double yc = ys[i] - m.fallback_;
            for (std::size_t a = 0; a < dims; ++a) {
                xty(a) += xc[a] * yc;
                for (std::size_t b = a; b < dims; ++b) xtx(a, b) += xc[a] * xc[b];
            }
        }
        xtx = xtx.selfadjointView<Eigen::Upper>();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xtx);
        const double max_ev = eig.eigenvalues().maxCoeff();
        const double min_ev = eig.eigenvalues().minCoeff();
        if (spec.ridge == 0.0 && !(min_ev > 1e-12 * std::max(max_ev, 1e-300)))
            throw FitError("singular normal equations for E[" + target + " | " + join(inputs, ", ") +
                           "]; use a ridge > 0");
        xtx.diagonal().array() += spec.ridge;
        const Eigen::VectorXd beta = xtx.ldlt().solve(xty);
        if (!beta.allFinite()) throw FitError("linear fit for E[" + target + "] produced non-finite coefficients");
        FittedModel::Linear lin;
        lin.coef.assign(beta.data(), beta.data() + dims);
        lin.intercept = m.fallback_;
        for (std::size_t k = 0; k < dims; ++k) lin.intercept -= lin.coef[k] * mean_x[k];
        m.params_ = std::move(lin);
        break;
    }
    case EstimatorKind::DiscreteCpt: {
        FittedModel::Cpt cpt;
        cpt.dictionary.resize(dims);
        std::uint64_t space = 1;
        for (std::size_t k = 0; k < dims; ++k) {
            auto& dict = cpt.dictionary[k];
            for (auto r : rows) dict.push_back((*x_cols[k])[r]);
            std::sort(dict.begin(), dict.end());
            dict.erase(std::unique(dict.begin(), dict.end()), dict.end());
            dict.shrink_to_fit();
            cpt.radix.push_back(space);
            if (space > std::numeric_limits<std::uint64_t>::max() / (dict.size() + 1))
                throw FitError("DiscreteCpt configuration space too large for inputs " + join(inputs, ", "));
            space *= dict.size();
        }
        std::vector<std::vector<double>> grouped;
        std::vector<double> sums;
        std::vector<std::size_t> counts;
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t code = 0;
            for (std::size_t k = 0; k < dims; ++k) {
                const auto& dict = cpt.dictionary[k];
                const auto pos = std::lower_bound(dict.begin(), dict.end(), (*x_cols[k])[rows[i]]) - dict.begin();
                code += static_cast<std::uint64_t>(pos) * cpt.radix[k];
            }
            auto [it, inserted] = cpt.index.emplace(code, grouped.size());
            if (inserted) {
                grouped.emplace_back();
                sums.push_back(0.0);
                counts.push_back(0);
            }
            if (with_distributions) grouped[it->second].push_back(ys[i]);
            ++counts[it->second];
            sums[it->second] += ys[i];
        }
        for (std::size_t c = 0; c < grouped.size(); ++c) {
            cpt.counts.push_back(counts[c]);
            cpt.means.push_back(sums[c] / static_cast<double>(counts[c]));
            if (with_distributions) cpt.distributions.push_back(empirical_distribution(std::move(grouped[c])));
        }
        if (with_distributions) cpt.marginal = empirical_distribution(ys);
        m.params_ = std::move(cpt);
        break;
    }
    case EstimatorKind::BinnedNonparametric: {
        FittedModel::Binned b;
        b.bins = spec.bins_for(dims);
        for (std::size_t k = 0; k < dims; ++k) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (auto r : rows) {
                lo = std::min(lo, (*x_cols[k])[r]);
                hi = std::max(hi, (*x_cols[k])[r]);
            }
            b.lo.push_back(lo);
            b.width.push_back(hi > lo ? (hi - lo) / b.bins : 1.0);
        }
        double total_cells = 1.0;
        for (std::size_t k = 0; k < dims; ++k) total_cells *= b.bins;
        b.dense = total_cells <= static_cast<double>(kMaxDenseCells);
        b.logistic = y_min >= 0.0 && y_max <= 1.0;

        std::vector<double> x(dims);
        if (b.dense) {
            const auto cells = static_cast<std::size_t>(total_cells);
            std::vector<double> sum(cells, 0.0);
            b.counts.assign(cells, 0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t k = 0; k < dims; ++k) x[k] = (*x_cols[k])[rows[i]];
                const auto c = b.cell_of(x);
                sum[c] += ys[i];
                ++b.counts[c];
            }
            b.values.assign(cells, m.fallback_);
            const int radius = static_cast<int>(dims) <= kMaxSmoothedDims ? spec.radius_for(dims) : 0;
            if (radius == 0) {
                for (std::size_t c = 0; c < cells; ++c)
                    if (b.counts[c]) b.values[c] = sum[c] / b.counts[c];
            } else {
                // Offsets in [-radius, radius]^dims with Gaussian kernel weights.
                std::vector<std::vector<int>> offsets;
                std::vector<double> kernel;
                std::vector<int> o(dims, -radius);
                for (;;) {
                    double r2 = 0.0;
                    for (int v : o) r2 += static_cast<double>(v) * v;
                    offsets.push_back(o);
                    kernel.push_back(std::exp(-0.5 * r2 / (static_cast<double>(radius) * radius)));
                    std::size_t k = 0;
                    while (k < dims && ++o[k] > radius) o[k++] = -radius;
                    if (k == dims) break;
                }
                const LocalFit cfg{dims, b.logistic, y_min, y_max};
                std::vector<int> coord(dims);
                std::vector<Neighbour> nb;
                for (std::size_t c = 0; c < cells; ++c) {
                    if (!b.counts[c]) continue;
                    std::size_t rest = c;
                    for (std::size_t k = 0; k < dims; ++k) {
                        coord[k] = static_cast<int>(rest % b.bins);
                        rest /= b.bins;
                    }
                    nb.clear();
                    for (std::size_t q = 0; q < offsets.size(); ++q) {
                        std::size_t idx = 0;
                        std::size_t stride = 1;
                        bool inside = true;
                        for (std::size_t k = 0; k < dims; ++k) {
                            const int v = coord[k] + offsets[q][k];
                            if (v < 0 || v >= b.bins) {
                                inside = false;
                                break;
                            }
                            idx += static_cast<std::size_t>(v) * stride;
                            stride *= b.bins;
                        }
                        if (!inside || !b.counts[idx]) continue;
                        Neighbour nbr;
                        nbr.offset.assign(offsets[q].begin(), offsets[q].end());
                        nbr.n = kernel[q] * b.counts[idx];
                        nbr.s = kernel[q] * sum[idx];
                        nb.push_back(std::move(nbr));
                    }
                    b.values[c] = local_estimate(cfg, nb);
                }
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t k = 0; k < dims; ++k) x[k] = (*x_cols[k])[rows[i]];
                auto& cell = b.sparse[b.cell_of(x)];
                cell.first += ys[i];
                ++cell.second;
            }
            for (auto& [code, cell] : b.sparse) cell.first /= cell.second;
        }
        m.params_ = std::move(b);
        break;
    }
    }
    return m;
}

// ---------------------------------------------------------------- prediction

std::optional<std::size_t> FittedModel::Cpt::lookup(std::span<const double> x) const {
    std::uint64_t code = 0;
    for (std::size_t k = 0; k < dictionary.size(); ++k) {
        const auto& dict = dictionary[k];
        const auto it = std::lower_bound(dict.begin(), dict.end(), x[k]);
        if (it == dict.end() || *it != x[k]) return std::nullopt;
        code += static_cast<std::uint64_t>(it - dict.begin()) * radix[k];
    }
    const auto found = index.find(code);
    if (found == index.end()) return std::nullopt;
    return found->second;
}

std::uint64_t FittedModel::Binned::cell_of(std::span<const double> x) const {
    std::uint64_t code = 0;
    std::uint64_t stride = 1;
    for (std::size_t k = 0; k < lo.size(); ++k) {
        const double pos = std::floor((x[k] - lo[k]) / width[k]);
        const auto idx = static_cast<std::uint64_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
        code += idx * stride;
        stride *= static_cast<std::uint64_t>(bins);
    }
    return code;
}

double FittedModel::Binned::interpolate(std::span<const double> x, double fallback) const {
    // Multilinear interpolation between the centers of populated cells, on
    // the logit scale for targets in [0, 1].
    const auto logit = [](double v) {
        const double c = std::clamp(v, 1e-9, 1.0 - 1e-9);
        return std::log(c / (1.0 - c));
    };
    const std::size_t dims = lo.size();
    std::vector<std::size_t> base(dims);
    std::vector<double> frac(dims);
    for (std::size_t k = 0; k < dims; ++k) {
        const double pos = std::clamp((x[k] - lo[k]) / width[k] - 0.5, 0.0, static_cast<double>(bins - 1));
        base[k] = std::min(static_cast<std::size_t>(pos), static_cast<std::size_t>(bins - 1));
        frac[k] = pos - static_cast<double>(base[k]);
    }
    double total_w = 0.0;
    double total_v = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{1} << dims); ++corner) {
        double w = 1.0;
        std::size_t idx = 0;
        std::size_t stride = 1;
        bool inside = true;
        for (std::size_t k = 0; k < dims; ++k) {
            const bool up = corner >> k & 1;
            const std::size_t v = base[k] + (up ? 1 : 0);
            if (v >= static_cast<std::size_t>(bins)) {
                inside = false;
                break;
            }
            w *= up ? frac[k] : 1.0 - frac[k];
            idx += v * stride;
            stride *= static_cast<std::size_t>(bins);
        }
        if (!inside || w == 0.0 || !counts[idx]) continue;
        total_w += w;
        total_v += w * (logistic ? logit(values[idx]) : values[idx]);
    }
    if (total_w == 0.0) return fallback;
    return logistic ? sigmoid(total_v / total_w) : total_v / total_w;
}

double FittedModel::predict(std::span<const double> x) const {
    if (x.size() != inputs_.size())
        throw ArgumentError("model for E[" + target_ + "] expects " + std::to_string(inputs_.size()) + " inputs");
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return fallback_;
            } else if constexpr (std::is_same_v<T, Linear>) {
                double v = p.intercept;
                for (std::size_t k = 0; k < x.size(); ++k) v += p.coef[k] * x[k];
                return v;
            } else if constexpr (std::is_same_v<T, Cpt>) {
                const auto c = p.lookup(x);
                return c ? p.means[*c] : fallback_;
            } else {
                if (p.dense) return p.interpolate(x, fallback_);
                const auto c = p.cell_of(x);
                const auto it = p.sparse.find(c);
                return it == p.sparse.end() ? fallback_ : it->second.first;
            }
        },
        params_);
}

double FittedModel::predict(const std::map<std::string, double, std::less<>>& row) const {
    std::vector<double> x;
    x.reserve(inputs_.size());
    for (const auto& in : inputs_) {
        const auto it = row.find(in);
        if (it == row.end()) throw ArgumentError("row is missing input '" + in + "'");
        x.push_back(it->second);
    }
    return predict(x);
}

std::vector<double> FittedModel::predict(const Dataset& d) const {
    std::vector<const std::vector<double>*> cols;
    for (const auto& in : inputs_) cols.push_back(&d.column(d.index_of(in)));
    std::vector<double> out(d.rows());
    std::vector<double> x(inputs_.size());
    for (std::size_t r = 0; r < d.rows(); ++r) {
        for (std::size_t k = 0; k < cols.size(); ++k) x[k] = (*cols[k])[r];
        out[r] = predict(x);
    }
    return out;
}

std::size_t FittedModel::parameter_count() const {
    return std::visit(
        [](const auto& p) -> std::size_t {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return 1;
            } else if constexpr (std::is_same_v<T, Linear>) {
                return p.coef.size() + 1;
            } else if constexpr (std::is_same_v<T, Cpt>) {
                return p.means.size();
            } else {
                if (!p.dense) return p.sparse.size();
                return static_cast<std::size_t>(std::count_if(p.counts.begin(), p.counts.end(),
                                                              [](auto c) { return c > 0; }));
            }
        },
        params_);
}

std::string FittedModel::summary() const {
    std::ostringstream os;
    os << "spec: " << spec_.to_string() << '\n'
       << "target: " << target_ << '\n'
       << "inputs: " << (inputs_.empty() ? std::string("(none)") : join(inputs_, ", ")) << '\n'
       << "parameters: " << parameter_count() << '\n'
       << "training_rows: " << training_rows_ << '\n';
    return os.str();
}

double FittedModel::intercept() const {
    if (const auto* lin = std::get_if<Linear>(&params_)) return lin->intercept;
    if (std::holds_alternative<Constant>(params_)) return fallback_;
    throw ArgumentError("intercept() is only defined for linear models");
}

const std::vector<double>& FittedModel::coefficients() const {
    static const std::vector<double> none;
    if (const auto* lin = std::get_if<Linear>(&params_)) return lin->coef;
    if (std::holds_alternative<Constant>(params_)) return none;
    throw ArgumentError("coefficients() is only defined for linear models");
}

std::vector<std::pair<double, double>> FittedModel::distribution(std::span<const double> x) const {
    if (const auto* c = std::get_if<Constant>(&params_)) {
        if (!c->distribution.empty()) return c->distribution;
    }
    if (const auto* cpt = std::get_if<Cpt>(&params_)) {
        if (x.size() != inputs_.size()) throw ArgumentError("distribution(): wrong input count");
        if (cpt->marginal.empty()) throw ArgumentError("distribution(): model was fitted without distributions");
        const auto cell = cpt->lookup(x);
        return cell ? cpt->distributions[*cell] : cpt->marginal;
    }
    throw ArgumentError("distribution() is only defined for DiscreteCpt models");
}

std::size_t FittedModel::support(std::span<const double> x) const {
    return std::visit(
        [&](const auto& p) -> std::size_t {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Cpt>) {
                const auto c = p.lookup(x);
                return c ? p.counts[*c] : 0;
            } else if constexpr (std::is_same_v<T, Binned>) {
                const auto c = p.cell_of(x);
                if (p.dense) return p.counts[c];
                const auto it = p.sparse.find(c);
                return it == p.sparse.end() ? 0 : it->second.second;
            } else {
                return training_rows_;
            }
        },
        params_);
}

std::vector<FittedModel::Cell> FittedModel::cells() const {
    const auto* b = std::get_if<Binned>(&params_);
    if (!b) throw ArgumentError("cells() is only defined for binned models");
    std::vector<Cell> out;
    auto decode = [&](std::uint64_t code, std::size_t count, double value) {
        Cell cell;
        cell.count = count;
        cell.value = value;
        for (std::size_t k = 0; k < b->lo.size(); ++k) {
            const auto idx = code % static_cast<std::uint64_t>(b->bins);
            code /= static_cast<std::uint64_t>(b->bins);
            cell.center.push_back(b->lo[k] + (static_cast<double>(idx) + 0.5) * b->width[k]);
        }
        out.push_back(std::move(cell));
    };
    if (b->dense) {
        for (std::size_t c = 0; c < b->counts.size(); ++c)
            if (b->counts[c]) decode(c, b->counts[c], b->values[c]);
    } else {
        std::vector<std::uint64_t> codes;
        for (const auto& [code, cell] : b->sparse) codes.push_back(code);
        std::sort(codes.begin(), codes.end());
        for (auto code : codes) decode(code, b->sparse.at(code).second, b->sparse.at(code).first);
    }
    return out;
}

} // namespace ccshap
