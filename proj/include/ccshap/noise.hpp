#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ccshap/rng.hpp"

namespace ccshap {

/// Distribution of an exogenous noise term.
class NoiseSpec {
public:
    enum class Kind { Normal, Laplace, Bernoulli, Uniform, Categorical };

    static NoiseSpec normal(double mean, double variance);
    static NoiseSpec laplace(double location, double scale);
    static NoiseSpec bernoulli(double p);
    static NoiseSpec uniform(double lo, double hi);
    /// Values 0..k-1 with the given probabilities (must sum to 1 within 1e-9).
    static NoiseSpec categorical(std::vector<double> probabilities);

    /// Parses `normal(0, 100)`, `laplace(0, 0.1)`, `bernoulli(0.15)`,
    /// `uniform(-1, 1)` or `categorical(0.2, 0.3, 0.5)`.
    static NoiseSpec parse(std::string_view text);

    Kind kind() const noexcept { return kind_; }
    const std::vector<double>& params() const noexcept { return params_; }
    double draw(Rng& rng) const;
    double mean() const;
    double variance() const;
    std::string to_string() const;

    bool operator==(const NoiseSpec&) const = default;

private:
    NoiseSpec(Kind kind, std::vector<double> params) : kind_(kind), params_(std::move(params)) {}

    Kind kind_ = Kind::Normal;
    std::vector<double> params_;
};

double standard_normal(Rng& rng);

} // namespace ccshap
