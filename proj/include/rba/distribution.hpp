#pragma once

#include <optional>
#include <string>
#include <vector>

namespace rba {

enum class DistFamily { Uniform01, TruncatedExponential, PiecewiseLinearQuantile, BimodalIrregular };

std::string to_string(DistFamily f);

// Value distribution represented by its quantile function v(q) on [0,1].
// Values stay in [0,1] and v is nondecreasing and continuous; constructors
// validate this.  Immutable after construction.
class ValueDistribution {
  public:
    struct Knot {
        double q;
        double v;
    };

    static ValueDistribution uniform01();
    static ValueDistribution truncated_exponential(double rate);
    static ValueDistribution piecewise_linear(std::vector<Knot> knots);
    // Non-concave-revenue test family: bulk of the mass on low values plus a
    // near-atom (width `atom_width` of value, mass `atom_mass`) around v_hi.
    static ValueDistribution bimodal_irregular(double v_lo = 0.3, double v_hi = 0.9,
                                               double atom_mass = 0.1,
                                               double atom_width = 0.02);

    DistFamily family() const { return family_; }

    // v(q); domain error outside [0,1].
    double value(double q) const;

    // v'(q). Analytic for all shipped families; piecewise-linear families
    // return the segment slope (right-continuous at knots).
    double slope(double q) const;

    // Interior quantiles where v has a kink; used as quadrature breakpoints.
    std::vector<double> kink_quantiles() const;

    const std::vector<Knot>& knots() const { return knots_; }
    double rate() const { return rate_; }

    std::string describe() const;

  private:
    ValueDistribution(DistFamily family, double rate, std::vector<Knot> knots);

    DistFamily family_;
    double rate_ = 0.0;          // TruncatedExponential only
    std::vector<Knot> knots_;    // piecewise-linear families only
};

// Revenue curve R(q) = v(q)(1-q) of a posted price serving quantiles above q;
// R(0) and R(1) are 0 by definition.
class RevenueCurve {
  public:
    explicit RevenueCurve(ValueDistribution dist) : dist_(std::move(dist)) {}

    const ValueDistribution& underlying() const { return dist_; }

    double revenue(double q) const;        // R(q); domain error outside [0,1]
    double slope(double q) const;          // R'(q) = v'(q)(1-q) - v(q)
    double virtual_value(double q) const;  // -R'(q); positive means serving profits

  private:
    ValueDistribution dist_;
};

// Smallest concave majorant of R sampled on a uniform grid.  With
// `exclude_top` the majorant is built on [0, 1-1/n] only and R is kept
// verbatim above (no ironing on the top 1/n quantiles).
class IronedRevenueCurve {
  public:
    IronedRevenueCurve(const RevenueCurve& rc, int grid_size, bool exclude_top, int agents);

    double value(double q) const;       // R_bar(q), linear interpolation
    double left_slope(double q) const;  // slope of the segment containing q
    double ironed_virtual(double q) const { return -left_slope(q); }

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return bar_; }
    bool excludes_top() const { return exclude_top_; }

  private:
    std::vector<double> grid_;
    std::vector<double> bar_;
    bool exclude_top_;
};

IronedRevenueCurve iron_revenue_curve(const RevenueCurve& rc, int grid_size = 4096,
                                      bool exclude_top = false, int agents = 2);

// True iff R sampled on the grid is concave within `tol` on second differences.
bool is_regular(const RevenueCurve& rc, int grid_size = 4096, double tol = 1e-9);

}  // namespace rba
