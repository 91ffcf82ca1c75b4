#include "molelab/param_space.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace molelab {

ParameterSpace::ParameterSpace(std::vector<ParameterSpec> specs)
    : specs_(std::move(specs)) {
    std::unordered_set<std::string> seen;
    for (const auto& s : specs_) {
        if (s.name.empty())
            throw std::invalid_argument("ParameterSpace: parameter with empty name");
        if (!seen.insert(s.name).second)
            throw std::invalid_argument("ParameterSpace: duplicate parameter name '" + s.name + "'");
        if (!(s.lower < s.upper))
            throw std::invalid_argument("ParameterSpace: parameter '" + s.name + "' needs lower < upper");
        if (s.scale == Scale::logarithmic && !(s.lower > 0.0))
            throw std::invalid_argument("ParameterSpace: logarithmic parameter '" + s.name + "' needs lower > 0");
    }
}

std::vector<std::string> ParameterSpace::names() const {
    std::vector<std::string> out;
    out.reserve(specs_.size());
    for (const auto& s : specs_) out.push_back(s.name);
    return out;
}

std::size_t ParameterSpace::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < specs_.size(); ++i)
        if (specs_[i].name == name) return i;
    throw std::invalid_argument("ParameterSpace: unknown parameter '" + name + "'");
}

double ParameterSpace::unit_at(std::size_t dim, double value) const {
    const ParameterSpec& s = specs_.at(dim);
    if (value < s.lower || value > s.upper)
        throw std::invalid_argument("ParameterSpace: value " + std::to_string(value) +
                                    " outside bounds of '" + s.name + "'");
    if (value == s.lower) return 0.0;
    if (value == s.upper) return 1.0;
    double u = 0.0;
    if (s.scale == Scale::logarithmic) {
        u = (std::log(value) - std::log(s.lower)) /
            (std::log(s.upper) - std::log(s.lower));
    } else {
        u = (value - s.lower) / (s.upper - s.lower);
    }
    return u < 0.0 ? 0.0 : (u > 1.0 ? 1.0 : u);
}

double ParameterSpace::value_at(std::size_t dim, double u) const {
    const ParameterSpec& s = specs_.at(dim);
    if (u < 0.0 || u > 1.0 || !(u == u))
        throw std::invalid_argument("ParameterSpace: unit coordinate " + std::to_string(u) +
                                    " outside [0,1] for '" + s.name + "'");
    if (u == 0.0) return s.lower;
    if (u == 1.0) return s.upper;
    double v = 0.0;
    if (s.scale == Scale::logarithmic) {
        v = std::exp(std::log(s.lower) +
                     u * (std::log(s.upper) - std::log(s.lower)));
    } else {
        v = s.lower + u * (s.upper - s.lower);
    }
    // guard against round-off drifting past the bounds
    return v < s.lower ? s.lower : (v > s.upper ? s.upper : v);
}

std::vector<double> ParameterSpace::to_unit(const ParameterVector& v) const {
    if (v.size() != specs_.size())
        throw std::invalid_argument("ParameterSpace::to_unit: dimension mismatch");
    std::vector<double> u(specs_.size());
    for (std::size_t i = 0; i < specs_.size(); ++i) u[i] = unit_at(i, v[i]);
    return u;
}

ParameterVector ParameterSpace::from_unit(const std::vector<double>& u) const {
    if (u.size() != specs_.size())
        throw std::invalid_argument("ParameterSpace::from_unit: dimension mismatch");
    ParameterVector v;
    v.values.resize(specs_.size());
    for (std::size_t i = 0; i < specs_.size(); ++i) v[i] = value_at(i, u[i]);
    return v;
}

ParameterVector ParameterSpace::clamp(const std::vector<double>& raw) const {
    if (raw.size() != specs_.size())
        throw std::invalid_argument("ParameterSpace::clamp: dimension mismatch");
    ParameterVector v;
    v.values.resize(specs_.size());
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        const ParameterSpec& s = specs_[i];
        v[i] = raw[i] < s.lower ? s.lower : (raw[i] > s.upper ? s.upper : raw[i]);
    }
    return v;
}

bool ParameterSpace::contains(const ParameterVector& v) const {
    if (v.size() != specs_.size()) return false;
    for (std::size_t i = 0; i < specs_.size(); ++i)
        if (v[i] < specs_[i].lower || v[i] > specs_[i].upper) return false;
    return true;
}

} // namespace molelab
