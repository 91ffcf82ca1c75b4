#pragma once
// Bounded, optionally log-scaled parameter spaces and points within them.
// The declaration order of the specs is the canonical genome layout used by
// every exploration method. Spaces are immutable after construction and safe
// for unrestricted concurrent reads.

#include <cstddef>
#include <string>
#include <vector>

namespace molelab {

enum class Scale { linear, logarithmic };

struct ParameterSpec {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    Scale scale = Scale::linear;
};

/// A point aligned with some ParameterSpace (one value per spec, in order).
struct ParameterVector {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    bool operator==(const ParameterVector&) const = default;
};

class ParameterSpace {
public:
    ParameterSpace() = default;

    /// Validates every spec: lower < upper, logarithmic bounds positive,
    /// names unique and non-empty. Throws std::invalid_argument otherwise.
    explicit ParameterSpace(std::vector<ParameterSpec> specs);

    std::size_t dimension() const { return specs_.size(); }
    const ParameterSpec& spec(std::size_t i) const { return specs_.at(i); }
    const std::vector<ParameterSpec>& specs() const { return specs_; }
    std::vector<std::string> names() const;
    /// Index of the named parameter; throws if unknown.
    std::size_t index_of(const std::string& name) const;

    /// Maps a valid point to the unit cube. Logarithmic dimensions
    /// interpolate in log space, so evolutionary operators acting on unit
    /// coordinates mutate them multiplicatively. Inverse of from_unit to
    /// within 1e-12 relative. Throws on dimension mismatch or values
    /// outside the bounds.
    std::vector<double> to_unit(const ParameterVector& v) const;

    /// Inverse of to_unit; endpoints map exactly onto the bounds.
    /// Throws when a coordinate leaves [0, 1].
    ParameterVector from_unit(const std::vector<double>& u) const;

    /// Projects raw coordinates onto the box, dimension by dimension.
    ParameterVector clamp(const std::vector<double>& raw) const;

    bool contains(const ParameterVector& v) const;

    /// Scaled interpolation along a single dimension (u in [0, 1]).
    double value_at(std::size_t dim, double u) const;
    /// Unit coordinate of a single value along one dimension.
    double unit_at(std::size_t dim, double value) const;

private:
    std::vector<ParameterSpec> specs_;
};

} // namespace molelab
