#pragma once

// Least-squares fits used to classify benchmark trends.

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "daledger/errors.hpp"

namespace daledger::fit {

struct Fit {
    std::vector<double> coef;
    std::vector<double> se;
    double sse = 0;
    double sst = 0;
    std::size_t n = 0;

    std::size_t params() const { return coef.size(); }
    double r2() const { return sst > 0 ? 1 - sse / sst : 1.0; }

    /// Gaussian AIC up to a shared constant.
    double aic() const
    {
        double s = std::max(sse, std::numeric_limits<double>::min());
        return double(n) * std::log(s / double(n)) + 2.0 * double(params());
    }

    double t(std::size_t i) const
    {
        if (se[i] == 0) return coef[i] == 0 ? 0 : std::copysign(std::numeric_limits<double>::infinity(), coef[i]);
        return coef[i] / se[i];
    }

    /// Two-sided p-value of coefficient i being zero.
    double p_value(std::size_t i) const
    {
        double ti = t(i);
        if (!std::isfinite(ti)) return 0;
        boost::math::students_t dist(double(n - params()));
        return 2 * boost::math::cdf(boost::math::complement(dist, std::fabs(ti)));
    }
};

using Basis = std::function<double(double)>;

/// Ordinary least squares of y on the given basis functions of x.
/// R^2 is always against the mean of y, also for fits without intercept.
inline Fit ols(const std::vector<double>& x, const std::vector<double>& y, const std::vector<Basis>& basis)
{
    if (x.size() != y.size() || x.size() <= basis.size() || basis.empty()) {
        throw DomainError("fit needs more points than parameters");
    }
    Eigen::Index n = static_cast<Eigen::Index>(x.size());
    Eigen::Index p = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd Y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Y(i) = y[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < p; ++j) X(i, j) = basis[static_cast<std::size_t>(j)](x[static_cast<std::size_t>(i)]);
    }
    auto qr = X.colPivHouseholderQr();
    if (qr.rank() < p) throw DomainError("fit design matrix is rank deficient");
    Eigen::VectorXd b = qr.solve(Y);
    Eigen::VectorXd r = Y - X * b;
    Fit f;
    f.n = x.size();
    f.sse = r.squaredNorm();
    f.sst = (Y.array() - Y.mean()).square().sum();
    double sigma2 = f.sse / double(n - p);
    Eigen::MatrixXd cov = sigma2 * (X.transpose() * X).inverse();
    for (Eigen::Index j = 0; j < p; ++j) {
        f.coef.push_back(b(j));
        f.se.push_back(std::sqrt(std::max(0.0, cov(j, j))));
    }
    return f;
}

inline double one(double) { return 1.0; }
inline double identity(double x) { return x; }

/// y = b x
inline Fit through_origin(const std::vector<double>& x, const std::vector<double>& y) { return ols(x, y, {identity}); }

/// y = a + b x
inline Fit linear(const std::vector<double>& x, const std::vector<double>& y) { return ols(x, y, {one, identity}); }

/// y = a + c log2(1 + x/scale)
inline Fit logarithmic(const std::vector<double>& x, const std::vector<double>& y, double scale)
{
    return ols(x, y, {one, [scale](double v) { return std::log2(1 + v / scale); }});
}

/// y = a + b x + c log2(1 + x/scale); coefficient 1 is the linear term.
inline Fit linear_plus_log(const std::vector<double>& x, const std::vector<double>& y, double scale)
{
    return ols(x, y, {one, identity, [scale](double v) { return std::log2(1 + v / scale); }});
}

struct ScaledFit {
    double scale = 1;
    Fit fit;
};

/// Log model with its scale profiled out: the scale minimising the
/// residual of y = a + c log2(1 + x/scale), from a geometric grid refined
/// by golden-section search around the best grid point.
inline ScaledFit best_logarithmic(const std::vector<double>& x, const std::vector<double>& y)
{
    double top = 1;
    for (double v : x) top = std::max(top, v);
    const double step = std::pow(2.0, 0.125);
    double best_s = top / 4096;
    double best_sse = logarithmic(x, y, best_s).sse;
    for (double s = best_s * step; s <= 4 * top; s *= step) {
        double e = logarithmic(x, y, s).sse;
        if (e < best_sse) best_s = s, best_sse = e;
    }
    double lo = std::log(best_s / step), hi = std::log(best_s * step);
    const double g = (std::sqrt(5.0) - 1) / 2;
    auto sse = [&](double l) { return logarithmic(x, y, std::exp(l)).sse; };
    for (int i = 0; i < 60; ++i) {
        double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
        if (sse(a) < sse(b)) hi = b; else lo = a;
    }
    double s = std::exp((lo + hi) / 2);
    auto f = logarithmic(x, y, s);
    if (f.sse > best_sse) return {best_s, logarithmic(x, y, best_s)};
    return {s, f};
}

/// Nested test of a linear term on top of the profiled log model. The
/// returned fit's coefficient 1 is the linear slope; its t statistic uses
/// one fewer degree of freedom for the profiled scale.
struct NestedTest {
    double scale = 1;
    Fit fit;
    double t = 0;
    double p = 1;
};

inline NestedTest linear_term_over_log(const std::vector<double>& x, const std::vector<double>& y)
{
    NestedTest out;
    out.scale = best_logarithmic(x, y).scale;
    out.fit = linear_plus_log(x, y, out.scale);
    out.t = out.fit.t(1);
    double df = double(out.fit.n) - double(out.fit.params()) - 1;
    if (df < 1) throw DomainError("too few points for the nested test");
    if (!std::isfinite(out.t)) {
        out.p = 0;
    } else {
        boost::math::students_t dist(df);
        out.p = 2 * boost::math::cdf(boost::math::complement(dist, std::fabs(out.t)));
    }
    return out;
}

} // namespace daledger::fit
