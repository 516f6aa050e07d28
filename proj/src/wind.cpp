#include "flightopt/wind.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace flightopt::wind {

namespace {

double int_pow(double base, int exp) {
    double r = 1.0;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

double eval_terms(const std::vector<Monomial>& terms, const Eigen::VectorXd& c,
                  double x, double y) {
    double s = 0.0;
    for (int i = 0; i < static_cast<int>(terms.size()); ++i) {
        s += c[i] * int_pow(x, terms[i].px) * int_pow(y, terms[i].py);
    }
    return s;
}

Eigen::Vector2d grad_terms(const std::vector<Monomial>& terms, const Eigen::VectorXd& c,
                           double x, double y) {
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (int i = 0; i < static_cast<int>(terms.size()); ++i) {
        const auto& t = terms[i];
        if (t.px > 0) g[0] += c[i] * t.px * int_pow(x, t.px - 1) * int_pow(y, t.py);
        if (t.py > 0) g[1] += c[i] * t.py * int_pow(x, t.px) * int_pow(y, t.py - 1);
    }
    return g;
}

int count_distinct(const std::vector<Monomial>& terms) {
    std::vector<std::pair<int, int>> seen;
    for (const auto& t : terms) seen.emplace_back(t.px, t.py);
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    return static_cast<int>(seen.size());
}

struct ComponentFit {
    Eigen::VectorXd coeffs;
    double rss;
    double condition;
};

// Minimum-norm least squares via SVD on a column-equilibrated design matrix.
// Equilibration keeps the rank decision meaningful when column norms span
// many orders of magnitude (x^4 at route scale vs the constant term).
ComponentFit solve_component(const Eigen::MatrixXd& design, const Eigen::VectorXd& rhs,
                             int structural_rank, const char* component) {
    const int cols = static_cast<int>(design.cols());
    Eigen::VectorXd col_scale(cols);
    for (int j = 0; j < cols; ++j) {
        const double n = design.col(j).norm();
        col_scale[j] = (n > 0.0) ? n : 1.0;
    }
    const Eigen::MatrixXd scaled = design * col_scale.cwiseInverse().asDiagonal();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const int rank = static_cast<int>(svd.rank());
    const double smallest_kept = (rank > 0) ? sv[rank - 1] : 0.0;
    const double condition = (smallest_kept > 0.0) ? sv[0] / smallest_kept
                                                   : std::numeric_limits<double>::infinity();
    if (rank < structural_rank) {
        std::ostringstream msg;
        msg << "rank-deficient design matrix for " << component << ": numerical rank "
            << rank << " < structural rank " << structural_rank
            << " (condition estimate " << condition << "); samples may be collinear";
        throw std::runtime_error(msg.str());
    }
    ComponentFit out;
    out.coeffs = col_scale.cwiseInverse().asDiagonal() * svd.solve(rhs);
    out.rss = (design * out.coeffs - rhs).squaredNorm();
    out.condition = condition;
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_double(const std::string& s, const char* column) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
        return v;
    } catch (const std::exception&) {
        std::ostringstream msg;
        msg << "non-numeric field '" << s << "' in column " << column;
        throw std::runtime_error(msg.str());
    }
}

}  // namespace

WindBasis WindBasis::standard() {
    WindBasis b;
    b.terms_x_ = {{0, 4}, {0, 3}, {0, 2}, {0, 1}, {0, 0}, {4, 0}, {3, 0},
                  {2, 0}, {1, 0}, {0, 0}, {1, 3}, {2, 2}, {3, 1}};
    b.terms_y_ = {{0, 4}, {0, 3}, {0, 2}, {0, 1}, {0, 0},
                  {4, 0}, {3, 0}, {2, 0}, {1, 0}, {0, 0}};
    b.standard_ = true;
    return b;
}

WindBasis WindBasis::full(int degree) {
    if (degree < 1 || degree > 9) {
        throw std::invalid_argument("basis degree must be in [1, 9]");
    }
    WindBasis b;
    for (int d = 0; d <= degree; ++d) {
        for (int px = 0; px <= d; ++px) {
            b.terms_x_.push_back({px, d - px});
        }
    }
    b.terms_y_ = b.terms_x_;
    return b;
}

int WindBasis::degree() const {
    int d = 0;
    for (const auto& t : terms_x_) d = std::max(d, t.px + t.py);
    for (const auto& t : terms_y_) d = std::max(d, t.px + t.py);
    return d;
}

int WindBasis::structural_rank_x() const { return count_distinct(terms_x_); }
int WindBasis::structural_rank_y() const { return count_distinct(terms_y_); }

PolynomialWindField::PolynomialWindField()
    : basis_(WindBasis::standard()),
      a_(Eigen::VectorXd::Zero(13)),
      b_(Eigen::VectorXd::Zero(10)) {}

PolynomialWindField::PolynomialWindField(WindBasis basis, Eigen::VectorXd a, Eigen::VectorXd b)
    : basis_(std::move(basis)), a_(std::move(a)), b_(std::move(b)) {
    if (a_.size() != static_cast<Eigen::Index>(basis_.terms_x().size()) ||
        b_.size() != static_cast<Eigen::Index>(basis_.terms_y().size())) {
        throw std::invalid_argument("wind coefficient count does not match basis");
    }
    if (!a_.allFinite() || !b_.allFinite()) {
        throw std::invalid_argument("wind coefficients must be finite");
    }
}

PolynomialWindField PolynomialWindField::published() {
    Eigen::VectorXd a(13);
    a << 5.404e-12, -7.525e-9, -1.010e-5, 1.8023e-3, 3.054e-1,
         1.071e-12, 8.131e-9, 1.957e-5, 1.360e-2, 3.054e-1,
         -4.493e-13, 1.372e-12, -1.971e-12;
    Eigen::VectorXd b(10);
    b << 6.505e-12, -2.358e-10, -2.009e-6, -8.207e-6, 6.216,
         -2.184e-12, -1.574e-8, -1.790e-5, 3.587e-2, 6.216;
    return PolynomialWindField(WindBasis::standard(), std::move(a), std::move(b));
}

Eigen::Vector2d PolynomialWindField::eval(const geo::PlanePoint& p) const {
    return {eval_terms(basis_.terms_x(), a_, p.x, p.y),
            eval_terms(basis_.terms_y(), b_, p.x, p.y)};
}

Eigen::Matrix2d PolynomialWindField::jacobian(const geo::PlanePoint& p) const {
    Eigen::Matrix2d j;
    j.row(0) = grad_terms(basis_.terms_x(), a_, p.x, p.y).transpose();
    j.row(1) = grad_terms(basis_.terms_y(), b_, p.x, p.y).transpose();
    return j;
}

std::vector<WindSample> average_slots(const std::vector<WindSample>& samples) {
    if (samples.empty()) {
        throw std::invalid_argument("average_slots: no samples");
    }
    struct Acc {
        double u_sum = 0.0, v_sum = 0.0;
        int count = 0;
    };
    std::map<std::pair<double, double>, Acc> groups;
    for (const auto& s : samples) {
        auto& acc = groups[{s.pos.x, s.pos.y}];
        acc.u_sum += s.u;
        acc.v_sum += s.v;
        acc.count += 1;
    }
    std::vector<WindSample> out;
    out.reserve(groups.size());
    for (const auto& [pos, acc] : groups) {
        WindSample s;
        s.pos = {pos.first, pos.second};
        s.u = acc.u_sum / acc.count;
        s.v = acc.v_sum / acc.count;
        s.slot = 0;
        out.push_back(s);
    }
    return out;
}

std::pair<PolynomialWindField, FitReport> fit(const std::vector<WindSample>& samples,
                                              const WindBasis& basis) {
    const int n = static_cast<int>(samples.size());
    const int terms_x = static_cast<int>(basis.terms_x().size());
    const int terms_y = static_cast<int>(basis.terms_y().size());
    if (n < std::max(terms_x, terms_y)) {
        std::ostringstream msg;
        msg << "fit needs at least " << std::max(terms_x, terms_y) << " samples, got " << n;
        throw std::invalid_argument(msg.str());
    }

    Eigen::MatrixXd dx(n, terms_x), dy(n, terms_y);
    Eigen::VectorXd ru(n), rv(n);
    for (int i = 0; i < n; ++i) {
        const auto& s = samples[i];
        for (int j = 0; j < terms_x; ++j) {
            dx(i, j) = int_pow(s.pos.x, basis.terms_x()[j].px) *
                       int_pow(s.pos.y, basis.terms_x()[j].py);
        }
        for (int j = 0; j < terms_y; ++j) {
            dy(i, j) = int_pow(s.pos.x, basis.terms_y()[j].px) *
                       int_pow(s.pos.y, basis.terms_y()[j].py);
        }
        ru[i] = s.u;
        rv[i] = s.v;
    }

    const ComponentFit fx = solve_component(dx, ru, basis.structural_rank_x(), "w_x");
    const ComponentFit fy = solve_component(dy, rv, basis.structural_rank_y(), "w_y");

    FitReport report;
    report.degree = basis.degree();
    report.rss_x = fx.rss;
    report.rss_y = fy.rss;
    report.condition_x = fx.condition;
    report.condition_y = fy.condition;
    report.sample_count = n;
    return {PolynomialWindField(basis, fx.coeffs, fy.coeffs), report};
}

std::vector<WindSample> ingest_csv(const std::string& path, const geo::Projection& proj) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open wind csv: " + path);
    }
    std::vector<WindSample> out;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (!header_seen) {
            if (t != "lon,lat,u,v,slot") {
                std::ostringstream msg;
                msg << path << " line " << line_no
                    << ": expected header 'lon,lat,u,v,slot', got '" << t << "'";
                throw std::runtime_error(msg.str());
            }
            header_seen = true;
            continue;
        }
        const auto fields = split_csv(t);
        if (fields.size() != 5) {
            std::ostringstream msg;
            msg << path << " line " << line_no << ": expected 5 columns, got " << fields.size();
            throw std::runtime_error(msg.str());
        }
        try {
            geo::GeoPoint g;
            g.lon = parse_double(fields[0], "lon");
            g.lat = parse_double(fields[1], "lat");
            WindSample s;
            s.u = parse_double(fields[2], "u");
            s.v = parse_double(fields[3], "v");
            s.slot = static_cast<int>(parse_double(fields[4], "slot"));
            if (s.slot < 0) {
                throw std::runtime_error("negative slot index");
            }
            if (std::abs(s.u) >= kMaxWindSpeed || std::abs(s.v) >= kMaxWindSpeed) {
                std::ostringstream msg;
                msg << "wind component exceeds " << kMaxWindSpeed << " m/s sanity bound";
                throw std::runtime_error(msg.str());
            }
            s.pos = geo::project(g, proj);
            out.push_back(s);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << path << " line " << line_no << ": " << e.what();
            throw std::runtime_error(msg.str());
        }
    }
    if (out.empty()) {
        throw std::runtime_error("wind csv contains no data rows: " + path);
    }
    return out;
}

}  // namespace flightopt::wind
