#include "ccshap/noise.hpp"

#include <cmath>
#include <numeric>

#include "ccshap/errors.hpp"
#include "ccshap/util.hpp"

namespace ccshap {

namespace {

double uniform_open01(Rng& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

} // namespace

double standard_normal(Rng& rng) {
    // Marsaglia polar method; one value per call keeps streams position-independent.
    for (;;) {
        const double u = 2.0 * uniform01(rng) - 1.0;
        const double v = 2.0 * uniform01(rng) - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

NoiseSpec NoiseSpec::normal(double mean, double variance) {
    if (!std::isfinite(mean) || !std::isfinite(variance) || variance < 0.0)
        throw ArgumentError("normal noise needs finite mean and variance >= 0");
    return {Kind::Normal, {mean, variance}};
}

NoiseSpec NoiseSpec::laplace(double location, double scale) {
    if (!std::isfinite(location) || !std::isfinite(scale) || scale <= 0.0)
        throw ArgumentError("laplace noise needs finite location and scale > 0");
    return {Kind::Laplace, {location, scale}};
}

NoiseSpec NoiseSpec::bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("bernoulli probability must lie in [0, 1]");
    return {Kind::Bernoulli, {p}};
}

NoiseSpec NoiseSpec::uniform(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) throw ArgumentError("uniform noise needs lo < hi");
    return {Kind::Uniform, {lo, hi}};
}

NoiseSpec NoiseSpec::categorical(std::vector<double> probabilities) {
    if (probabilities.empty()) throw ArgumentError("categorical noise needs at least one probability");
    for (double p : probabilities)
        if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("categorical probabilities must lie in [0, 1]");
    const double total = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("categorical probabilities must sum to 1");
    return {Kind::Categorical, std::move(probabilities)};
}

NoiseSpec NoiseSpec::parse(std::string_view text) {
    const auto t = trim(text);
    const auto open = t.find('(');
    if (open == std::string_view::npos || t.back() != ')')
        throw ParseError("noise spec '" + std::string(text) + "' must look like kind(arg, ...)");
    const auto kind = trim(t.substr(0, open));
    std::vector<double> args;
    const auto inner = t.substr(open + 1, t.size() - open - 2);
    if (!trim(inner).empty())
        for (const auto& a : split(inner, ',')) args.push_back(parse_double(a, "noise parameter"));
    auto need = [&](std::size_t n) {
        if (args.size() != n)
            throw ParseError("noise '" + std::string(kind) + "' takes " + std::to_string(n) + " parameters");
    };
    try {
        if (kind == "normal") {
            need(2);
            return normal(args[0], args[1]);
        }
        if (kind == "laplace") {
            need(2);
            return laplace(args[0], args[1]);
        }
        if (kind == "bernoulli") {
            need(1);
            return bernoulli(args[0]);
        }
        if (kind == "uniform") {
            need(2);
            return uniform(args[0], args[1]);
        }
        if (kind == "categorical") return categorical(args);
    } catch (const ArgumentError& e) {
        throw ParseError(e.what());
    }
    throw ParseError("unknown noise kind '" + std::string(kind) + "'");
}

double NoiseSpec::draw(Rng& rng) const {
    switch (kind_) {
    case Kind::Normal: return params_[0] + std::sqrt(params_[1]) * standard_normal(rng);
    case Kind::Laplace: {
        const double u = uniform_open01(rng) - 0.5;
        return params_[0] - params_[1] * std::copysign(1.0, u) * std::log(1.0 - 2.0 * std::abs(u));
    }
    case Kind::Bernoulli: return uniform01(rng) < params_[0] ? 1.0 : 0.0;
    case Kind::Uniform: return params_[0] + (params_[1] - params_[0]) * uniform01(rng);
    case Kind::Categorical: {
        const double u = uniform01(rng);
        double acc = 0.0;
        for (std::size_t k = 0; k < params_.size(); ++k) {
            acc += params_[k];
            if (u < acc) return static_cast<double>(k);
        }
        return static_cast<double>(params_.size() - 1);
    }
    }
    return 0.0;
}

double NoiseSpec::mean() const {
    switch (kind_) {
    case Kind::Normal:
    case Kind::Laplace: return params_[0];
    case Kind::Bernoulli: return params_[0];
    case Kind::Uniform: return 0.5 * (params_[0] + params_[1]);
    case Kind::Categorical: {
        double m = 0.0;
        for (std::size_t k = 0; k < params_.size(); ++k) m += static_cast<double>(k) * params_[k];
        return m;
    }
    }
    return 0.0;
}

double NoiseSpec::variance() const {
    switch (kind_) {
    case Kind::Normal: return params_[1];
    case Kind::Laplace: return 2.0 * params_[1] * params_[1];
    case Kind::Bernoulli: return params_[0] * (1.0 - params_[0]);
    case Kind::Uniform: return (params_[1] - params_[0]) * (params_[1] - params_[0]) / 12.0;
    case Kind::Categorical: {
        const double m = mean();
        double v = 0.0;
        for (std::size_t k = 0; k < params_.size(); ++k) v += params_[k] * (k - m) * (k - m);
        return v;
    }
    }
    return 0.0;
}

std::string NoiseSpec::to_string() const {
    static const char* names[] = {"normal", "laplace", "bernoulli", "uniform", "categorical"};
    std::vector<std::string> parts;
    for (double p : params_) parts.push_back(format_double(p));
    return std::string(names[static_cast<int>(kind_)]) + "(" + join(parts, ", ") + ")";
}

} // namespace ccshap
