// Polynomial wind-field surface: sample ingestion, time-slot averaging,
// least-squares fitting, and analytic evaluation with spatial Jacobian.
#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "flightopt/geo.hpp"

namespace flightopt::wind {

/// Physical sanity bound on wind component magnitude, m/s.
inline constexpr double kMaxWindSpeed = 200.0;

/// One gridded wind observation in the projected plane.
struct WindSample {
    geo::PlanePoint pos{};  // km
    double u{0.0};          // eastward component, m/s
    double v{0.0};          // northward component, m/s
    int slot{0};            // time-slot index, >= 0
};

/// A monomial x^px * y^py of the wind surface basis.
struct Monomial {
    int px{0};
    int py{0};
};

/**
 * Basis of the two wind surfaces. The default basis reproduces the published
 * 13-term / 10-term structure (including its duplicated constant terms, which
 * make the least-squares design matrix rank-deficient by construction).
 * Alternative degrees use the full bivariate monomial basis of that degree.
 */
class WindBasis {
  public:
    /// The fixed published basis:
    ///   w_x: y^4 y^3 y^2 y 1 x^4 x^3 x^2 x 1 y^3x y^2x^2 yx^3   (13 terms)
    ///   w_y: y^4 y^3 y^2 y 1 x^4 x^3 x^2 x 1                    (10 terms)
    static WindBasis standard();

    /// Full bivariate basis of all monomials with px + py <= degree, both
    /// components alike. degree must be in [1, 9].
    static WindBasis full(int degree);

    const std::vector<Monomial>& terms_x() const { return terms_x_; }
    const std::vector<Monomial>& terms_y() const { return terms_y_; }

    /// Highest total degree across the terms.
    int degree() const;

    /// Count of distinct monomials per component (the identifiable dimension
    /// of the least-squares problem; duplicates reduce it).
    int structural_rank_x() const;
    int structural_rank_y() const;

    bool is_standard() const { return standard_; }

  private:
    std::vector<Monomial> terms_x_;
    std::vector<Monomial> terms_y_;
    bool standard_{false};
};

/// Fitted polynomial wind surfaces. Coordinates in km, outputs in m/s.
class PolynomialWindField {
  public:
    PolynomialWindField();  // zero field on the standard basis
    PolynomialWindField(WindBasis basis, Eigen::VectorXd a, Eigen::VectorXd b);

    /// The coefficient vectors published for the ORD->SFO corridor fit.
    static PolynomialWindField published();

    /// Zero wind everywhere (standard basis, zero coefficients).
    static PolynomialWindField zero() { return PolynomialWindField(); }

    const WindBasis& basis() const { return basis_; }
    const Eigen::VectorXd& a() const { return a_; }
    const Eigen::VectorXd& b() const { return b_; }

    /// (w_x, w_y) in m/s at a point in km.
    Eigen::Vector2d eval(const geo::PlanePoint& p) const;

    /// d(w_x, w_y)/d(x, y), row-major semantics: row 0 = grad w_x, row 1 = grad w_y.
    Eigen::Matrix2d jacobian(const geo::PlanePoint& p) const;

  private:
    WindBasis basis_;
    Eigen::VectorXd a_;
    Eigen::VectorXd b_;
};

/// Diagnostics of one least-squares fit.
struct FitReport {
    int degree{0};
    double rss_x{0.0};       // residual sum of squares of the w_x solve, (m/s)^2
    double rss_y{0.0};
    double condition_x{0.0};  // singular-value ratio of the equilibrated design matrix
    double condition_y{0.0};
    int sample_count{0};
};

/// Collapses samples sharing an identical position to their across-slot mean.
/// Output is sorted by (x, y) with slot reset to 0. Empty input is an error.
std::vector<WindSample> average_slots(const std::vector<WindSample>& samples);

/// Independent minimum-norm least-squares fit of both components.
/// Errors: fewer samples than basis terms; design matrix rank below the
/// basis's structural rank (the condition estimate is named in the message).
std::pair<PolynomialWindField, FitReport> fit(const std::vector<WindSample>& samples,
                                              const WindBasis& basis = WindBasis::standard());

/// Reads `lon,lat,u,v,slot` CSV rows (UTF-8, '#' comments) and projects the
/// positions. Malformed rows raise with their line number.
std::vector<WindSample> ingest_csv(const std::string& path, const geo::Projection& proj);

}  // namespace flightopt::wind
