#pragma once
// Causality-regime classification from delayed correlations between the
// variations of one territorial variable (population) and two network
// variables (closeness, accessibility). Each of the 6 ordered variable pairs
// gets a ternary sign from the dominant positive-lag correlation — nonzero
// only when it clears a significance threshold — yielding one of 3^6 = 729
// regimes. A regime is a co-evolution when some territory-network pair is
// causal in both directions.

#include "molelab/city_interaction.hpp"
#include "molelab/nsga2.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace molelab {

struct VariableSet {
    std::vector<double> population;    ///< territorial
    std::vector<double> closeness;     ///< network
    std::vector<double> accessibility; ///< network

    /// Equal lengths and T >= 2*tau_max + 8; throws otherwise.
    void validate(int tau_max) const;
};

enum class PairSign : int { negative = -1, none = 0, positive = 1 };

/// Ternary signs over the ordered pairs, in the canonical order
///   population->closeness, closeness->population,
///   population->accessibility, accessibility->population,
///   closeness->accessibility, accessibility->closeness.
struct RegimeCode {
    std::array<PairSign, 6> signs{};

    std::string to_string() const;               ///< 6 chars over {+,0,-}
    static RegimeCode from_string(const std::string& text);
    auto operator<=>(const RegimeCode&) const = default;
};

inline constexpr std::size_t kRegimeSpaceSize = 729; // 3^6

/// All 729 codes, lexicographic in (-, 0, +) per position.
std::vector<RegimeCode> enumerate_regimes();

struct LaggedCorrelation {
    int tau_max = 0;
    std::vector<double> rho; ///< indexed tau + tau_max, tau in [-tau_max, tau_max]

    double at(int tau) const { return rho.at(static_cast<std::size_t>(tau + tau_max)); }
};

/// Pearson correlation of (dx_t, dy_{t+tau}) over the overlapping window for
/// every lag, where dx, dy are first differences (or the raw series when
/// use_differences is false). Throws on insufficient length or a
/// zero-variance window.
LaggedCorrelation lagged_correlation(const std::vector<double>& x,
                                     const std::vector<double>& y, int tau_max,
                                     bool use_differences = true);

/// Direction x->y: positive lags only. Returns the sign at the largest
/// |rho(tau)|, tau in [1, tau_max], when it reaches the threshold; the
/// earliest lag wins ties.
PairSign classify_pair(const LaggedCorrelation& correlation, double threshold);

RegimeCode classify_regime(const VariableSet& vars, int tau_max, double threshold,
                           bool use_differences = true);

/// Reciprocal causality on some (territory, network) pair; network-network
/// reciprocity does not qualify.
bool is_coevolution(const RegimeCode& code);

struct RegimeCensus {
    std::map<RegimeCode, std::size_t> counts;
    std::size_t skipped = 0; ///< degenerate runs

    std::size_t distinct() const { return counts.size(); }
    std::size_t distinct_coevolution() const;
    /// Distinct co-evolution codes over the 729 possible regimes.
    double coevolution_fraction() const;
};

RegimeCensus regime_census(const std::vector<VariableSet>& runs, int tau_max,
                           double threshold, const LogFn& log = {});

/// Monte-Carlo null calibration: the q-quantile of max_{tau>0} |rho| for
/// independent white-noise series of length T, under the same differencing
/// pipeline as classification.
double null_threshold(int series_length, int tau_max, double quantile,
                      std::size_t trials, std::uint64_t seed);

/// Aggregates a trajectory into the three named series: total population,
/// mean closeness, mean accessibility.
VariableSet to_variable_set(const cityinter::SystemTrajectory& trajectory);

/// Reads externally produced series; header population,closeness,accessibility.
VariableSet load_variable_set_csv(const std::string& path);

} // namespace molelab
