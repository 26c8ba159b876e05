#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "ccshap/dataset.hpp"

namespace ccshap {

enum class EstimatorKind { LinearLeastSquares, DiscreteCpt, BinnedNonparametric };

/// Which learner fits a conditional expectation E[target | inputs].
struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::BinnedNonparametric;
    /// Ridge penalty on slopes for the linear kind (the intercept is never penalized).
    double ridge = 1e-8;
    /// Bins per input dimension; 0 picks a default from the input count.
    int bins = 0;
    /// Neighbourhood radius (in cells) of the local-likelihood smoother.
    /// 0 keeps raw cell means; -1 picks a default from the bin count.
    int smoothing = -1;

    static EstimatorSpec linear(double ridge = 1e-8);
    static EstimatorSpec discrete();
    static EstimatorSpec binned(int bins = 0, int smoothing = -1);

    /// `linear`, `linear:<ridge>`, `cpt`, `binned`, `binned:<bins>`, `binned:<bins>:<radius>`.
    static EstimatorSpec parse(std::string_view text);
    std::string to_string() const;

    int bins_for(std::size_t n_inputs) const;
    int radius_for(std::size_t n_inputs) const;
    void validate() const;
};

/// Binned models report cells holding at least this many training points
/// as the high-density region.
inline constexpr std::size_t kDenseCellCount = 50;

/// A trained conditional-expectation function. Immutable once fitted.
class FittedModel {
public:
    struct Cell {
        std::vector<double> center;
        std::size_t count = 0;
        double value = 0.0;
    };

    const EstimatorSpec& spec() const noexcept { return spec_; }
    const std::vector<std::string>& inputs() const noexcept { return inputs_; }
    const std::string& target() const noexcept { return target_; }
    std::size_t training_rows() const noexcept { return training_rows_; }
    /// Training-set mean of the target; returned for unseen inputs.
    double fallback() const noexcept { return fallback_; }

    /// `x` is aligned with inputs().
    double predict(std::span<const double> x) const;
    /// Throws ArgumentError when the row misses an input.
    double predict(const std::map<std::string, double, std::less<>>& row) const;
    /// Reads the input columns of `d` by name.
    std::vector<double> predict(const Dataset& d) const;

    std::size_t parameter_count() const;
    /// spec, input list, parameter count and training rows, one per line.
    std::string summary() const;

    // Linear models only.
    double intercept() const;
    const std::vector<double>& coefficients() const;

    /// DiscreteCpt only: empirical distribution of the target for the
    /// configuration of x (value, probability), falling back to the marginal.
    std::vector<std::pair<double, double>> distribution(std::span<const double> x) const;

    /// Training points sharing x's cell (binned) or configuration (cpt).
    std::size_t support(std::span<const double> x) const;

    /// Binned models only: every non-empty cell with its center and fitted value.
    std::vector<Cell> cells() const;

private:
    friend FittedModel fit(const EstimatorSpec&, const Dataset&, const std::vector<std::string>&, const std::string&,
                           std::span<const std::size_t>, bool);

    struct Constant {
        std::vector<std::pair<double, double>> distribution;
    };
    struct Linear {
        double intercept = 0.0;
        std::vector<double> coef;
    };
    struct Cpt {
        std::vector<std::vector<double>> dictionary;  // sorted distinct values per input
        std::vector<std::uint64_t> radix;
        std::unordered_map<std::uint64_t, std::size_t> index;
        std::vector<std::size_t> counts;
        std::vector<double> means;
        std::vector<std::vector<std::pair<double, double>>> distributions;
        std::vector<std::pair<double, double>> marginal;
        std::optional<std::size_t> lookup(std::span<const double> x) const;
    };
    struct Binned {
        int bins = 2;
        std::vector<double> lo;
        std::vector<double> width;
        bool dense = true;
        bool logistic = false;
        std::vector<double> values;
        std::vector<std::uint32_t> counts;
        std::unordered_map<std::uint64_t, std::pair<double, std::uint32_t>> sparse;
        std::uint64_t cell_of(std::span<const double> x) const;
        double interpolate(std::span<const double> x, double fallback) const;
    };

    EstimatorSpec spec_;
    std::vector<std::string> inputs_;
    std::string target_;
    std::size_t training_rows_ = 0;
    double fallback_ = 0.0;
    std::variant<Constant, Linear, Cpt, Binned> params_;
};

/// Fit E[target | inputs] on the given rows of d (all rows when `rows` is empty).
/// Empty `inputs` yields the constant model mean(target). DiscreteCpt models
/// keep per-configuration distributions only when `with_distributions` is set.
FittedModel fit(const EstimatorSpec& spec, const Dataset& d, const std::vector<std::string>& inputs,
                const std::string& target, std::span<const std::size_t> rows = {}, bool with_distributions = false);

} // namespace ccshap
