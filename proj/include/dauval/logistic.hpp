#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dauval/csv.hpp"
#include "dauval/error.hpp"
#include "dauval/parallel.hpp"
#include "dauval/random.hpp"
#include "dauval/stats.hpp"

namespace dauval {

/// Closed-form solution of dU/dt = rU(1 - U/K) with U(0) = u0.
struct LogisticParams {
    double K = 1.0;  // carrying capacity
    double r = 0.0;  // growth rate, 1/day
    double u0 = 0.5; // value at t = 0
    double rss = 0.0;
    int iterations = 0;

    bool valid() const { return K > 0.0 && r > 0.0 && u0 > 0.0 && u0 < K && std::isfinite(K) && std::isfinite(r); }
};

struct TimePoint {
    double t = 0.0; // days
    double y = 0.0;
};

/// K u0 e^{rt} / (K - u0 + u0 e^{rt}), evaluated without overflow for either sign of rt.
inline double logistic_value(const LogisticParams& p, double t) {
    const double rt = p.r * t;
    if (rt >= 0.0) return p.K * p.u0 / (p.u0 + (p.K - p.u0) * std::exp(-rt));
    const double e = std::exp(rt);
    return p.K * p.u0 * e / (p.K - p.u0 + p.u0 * e);
}

namespace detail {

struct LogisticGrad {
    double value, dK, dr, du0;
};

inline LogisticGrad logistic_grad(double K, double r, double u0, double t) {
    const double rt = r * t;
    if (rt >= 0.0) {
        const double q = std::exp(-rt);
        const double D = u0 + (K - u0) * q;
        const double D2 = D * D;
        return {K * u0 / D, u0 * u0 * (1.0 - q) / D2, K * u0 * (K - u0) * t * q / D2, K * K * q / D2};
    }
    const double e = std::exp(rt);
    const double D = K - u0 + u0 * e;
    const double D2 = D * D;
    return {K * u0 * e / D, u0 * u0 * e * (e - 1.0) / D2, K * u0 * (K - u0) * t * e / D2, K * K * e / D2};
}

/// Solves the small dense system A x = b by Gaussian elimination with partial pivoting.
template <std::size_t N>
std::optional<std::array<double, N>> solve(std::array<std::array<double, N>, N> A, std::array<double, N> b) {
    for (std::size_t c = 0; c < N; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < N; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        if (!(std::abs(A[piv][c]) > 0.0)) return std::nullopt;
        std::swap(A[c], A[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < N; ++r) {
            const double f = A[r][c] / A[c][c];
            for (std::size_t k = c; k < N; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    std::array<double, N> x{};
    for (std::size_t c = N; c-- > 0;) {
        double s = b[c];
        for (std::size_t k = c + 1; k < N; ++k) s -= A[c][k] * x[k];
        x[c] = s / A[c][c];
    }
    return x;
}

struct LeastSquaresResult {
    bool converged = false;
    int iterations = 0;
    double rss = 0.0;
};

inline constexpr int kIterationBudget = 500;
inline constexpr double kRelativeRssTolerance = 1e-10;
inline constexpr double kRelativeStepTolerance = 1e-9;

/// Levenberg-Marquardt with Marquardt diagonal scaling (invariant to parameter units).
/// `eval(theta, residuals, jacobian_rows)` fills residuals y - f and df/dtheta per point;
/// `feasible(theta)` rejects steps outside the parameter domain.
/// Converged once an accepted step changes rss by < 1e-10 relative and moves every
/// parameter by < 1e-9 relative, or when no feasible descent step remains.
template <std::size_t N, class Eval, class Feasible>
LeastSquaresResult levenberg_marquardt(std::array<double, N>& theta, std::size_t n_points, double rss_scale,
                                       Eval&& eval, Feasible&& feasible) {
    std::vector<double> res(n_points), res_try(n_points);
    std::vector<std::array<double, N>> jac(n_points), jac_try(n_points);
    auto sum_sq = [](const std::vector<double>& r) {
        double s = 0.0;
        for (double v : r) s += v * v;
        return s;
    };

    LeastSquaresResult out;
    eval(theta, res, jac);
    out.rss = sum_sq(res);
    if (!std::isfinite(out.rss)) return out;
    double lambda = 1e-3;
    const double floor_rss = rss_scale * 1e-30;

    for (out.iterations = 1; out.iterations <= kIterationBudget; ++out.iterations) {
        if (out.rss <= floor_rss) {
            out.converged = true;
            return out;
        }
        std::array<std::array<double, N>, N> A{};
        std::array<double, N> g{};
        for (std::size_t i = 0; i < n_points; ++i)
            for (std::size_t a = 0; a < N; ++a) {
                g[a] += jac[i][a] * res[i];
                for (std::size_t b = 0; b < N; ++b) A[a][b] += jac[i][a] * jac[i][b];
            }

        bool accepted = false;
        while (!accepted) {
            auto M = A;
            for (std::size_t a = 0; a < N; ++a) M[a][a] += lambda * std::max(A[a][a], 1e-300);
            const auto step = solve<N>(M, g);
            std::array<double, N> trial = theta;
            if (step)
                for (std::size_t a = 0; a < N; ++a) trial[a] += (*step)[a];
            double rss_try = std::numeric_limits<double>::infinity();
            if (step && feasible(trial)) {
                eval(trial, res_try, jac_try);
                rss_try = sum_sq(res_try);
            }
            bool small_step = step.has_value();
            for (std::size_t a = 0; step && a < N; ++a)
                small_step = small_step && std::abs((*step)[a]) <= kRelativeStepTolerance * std::abs(theta[a]);
            if (rss_try == out.rss && small_step) {
                out.converged = true;
                return out;
            }
            if (std::isfinite(rss_try) && rss_try < out.rss) {
                const double drop = (out.rss - rss_try) / out.rss;
                theta = trial;
                res.swap(res_try);
                jac.swap(jac_try);
                out.rss = rss_try;
                lambda = std::max(lambda * 0.1, 1e-15);
                accepted = true;
                if ((drop < kRelativeRssTolerance && small_step) || rss_try == 0.0) {
                    out.converged = true;
                    return out;
                }
            } else {
                lambda *= 10.0;
                if (lambda > 1e16) {
                    // no feasible descent direction left: stationary point
                    out.converged = true;
                    return out;
                }
            }
        }
    }
    out.iterations = kIterationBudget;
    return out;
}

inline void check_points(std::span<const TimePoint> points, const char* who) {
    if (points.size() < 4) throw ArgumentError(std::string(who) + ": need >= 4 points");
    std::set<double> ts;
    for (const auto& p : points) {
        if (!(p.y > 0.0) || !std::isfinite(p.y) || !std::isfinite(p.t))
            throw ArgumentError(std::string(who) + ": every y must be positive and finite");
        ts.insert(p.t);
    }
    if (ts.size() < 3) throw ArgumentError(std::string(who) + ": need >= 3 distinct t");
}

inline const TimePoint& earliest(std::span<const TimePoint> points) {
    return *std::min_element(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
}

inline double max_y(std::span<const TimePoint> points) {
    double m = 0.0;
    for (const auto& p : points) m = std::max(m, p.y);
    return m;
}

/// Growth rate guess: slope of logit(y / K) against t.
inline double initial_rate(std::span<const TimePoint> points, double K) {
    std::vector<double> t, z;
    for (const auto& p : points) {
        const double f = p.y / K;
        if (f > 0.0 && f < 1.0) {
            t.push_back(p.t);
            z.push_back(std::log(f / (1.0 - f)));
        }
    }
    double slope = 0.0;
    try {
        slope = stats::ols(t, z).slope;
    } catch (const std::invalid_argument&) {
    }
    if (slope > 0.0 && std::isfinite(slope)) return slope;
    double span = 1.0;
    for (const auto& p : points) span = std::max(span, std::abs(p.t - earliest(points).t));
    return 1e-3 / span;
}

inline double sum_y2(std::span<const TimePoint> points) {
    double s = 0.0;
    for (const auto& p : points) s += p.y * p.y;
    return s;
}

} // namespace detail

/// Raised when the refinement exhausts its budget; carries the best parameters found.
class FitFailureError : public Error {
public:
    FitFailureError(const std::string& what, LogisticParams best)
        : Error(ErrorKind::fit_failure, what), best_(best) {}
    const LogisticParams& best() const noexcept { return best_; }

private:
    LogisticParams best_;
};

/// Least-squares logistic fit over (K, r, u0).
/// Start: K = 1.05 max(y), u0 = earliest y, r from the logit regression.
inline LogisticParams fit_logistic(std::span<const TimePoint> points) {
    detail::check_points(points, "fit_logistic");
    std::array<double, 3> theta{};
    theta[0] = 1.05 * detail::max_y(points);
    theta[2] = detail::earliest(points).y;
    theta[1] = detail::initial_rate(points, theta[0]);

    auto eval = [&](const std::array<double, 3>& th, std::vector<double>& res, std::vector<std::array<double, 3>>& jac) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto g = detail::logistic_grad(th[0], th[1], th[2], points[i].t);
            res[i] = points[i].y - g.value;
            jac[i] = {g.dK, g.dr, g.du0};
        }
    };
    auto feasible = [](const std::array<double, 3>& th) {
        return th[0] > 0.0 && th[1] > 0.0 && th[2] > 0.0 && th[2] < th[0] && std::isfinite(th[0]);
    };
    const auto res = detail::levenberg_marquardt<3>(theta, points.size(), detail::sum_y2(points), eval, feasible);
    LogisticParams p{theta[0], theta[1], theta[2], res.rss, res.iterations};
    if (!res.converged)
        throw FitFailureError("fit_logistic: no convergence in " + std::to_string(detail::kIterationBudget) +
                                  " iterations (rss " + csv::format(res.rss) + ")",
                              p);
    return p;
}

/// Least squares over (r, u0) with the carrying capacity pinned at `K_fixed` > max(y).
inline LogisticParams fit_logistic_fixed_k(std::span<const TimePoint> points, double K_fixed) {
    detail::check_points(points, "fit_logistic_fixed_k");
    if (!(K_fixed > detail::max_y(points)) || !std::isfinite(K_fixed))
        throw ArgumentError("fit_logistic_fixed_k: K_fixed " + csv::format(K_fixed) + " must exceed max(y) " +
                            csv::format(detail::max_y(points)));
    std::array<double, 2> theta{detail::initial_rate(points, K_fixed), detail::earliest(points).y};

    auto eval = [&](const std::array<double, 2>& th, std::vector<double>& res, std::vector<std::array<double, 2>>& jac) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto g = detail::logistic_grad(K_fixed, th[0], th[1], points[i].t);
            res[i] = points[i].y - g.value;
            jac[i] = {g.dr, g.du0};
        }
    };
    auto feasible = [&](const std::array<double, 2>& th) { return th[0] > 0.0 && th[1] > 0.0 && th[1] < K_fixed; };
    const auto res = detail::levenberg_marquardt<2>(theta, points.size(), detail::sum_y2(points), eval, feasible);
    LogisticParams p{K_fixed, theta[0], theta[1], res.rss, res.iterations};
    if (!res.converged)
        throw FitFailureError("fit_logistic_fixed_k: no convergence in " + std::to_string(detail::kIterationBudget) +
                                  " iterations",
                              p);
    return p;
}

inline constexpr std::size_t kMinBootstrapResamples = 200;
inline constexpr double kMaxBootstrapFailureRate = 0.2;

/// Residual bootstrap of the carrying capacity: residuals of `fit` are resampled with
/// replacement onto the fitted curve and refitted. Returns the sorted K estimates of the
/// successful refits. Resample i draws only from stream (seed, i), so the result does not
/// depend on `threads`.
inline std::vector<double> bootstrap_carrying_capacity(std::span<const TimePoint> points, const LogisticParams& fit,
                                                       std::size_t n_resamples, std::uint64_t seed,
                                                       std::size_t threads = 1) {
    detail::check_points(points, "bootstrap_carrying_capacity");
    if (n_resamples < kMinBootstrapResamples)
        throw ArgumentError("bootstrap needs >= " + std::to_string(kMinBootstrapResamples) + " resamples");
    if (!fit.valid()) throw ArgumentError("bootstrap needs a converged fit");

    const std::size_t n = points.size();
    std::vector<double> fitted(n), residuals(n);
    for (std::size_t i = 0; i < n; ++i) {
        fitted[i] = logistic_value(fit, points[i].t);
        residuals[i] = points[i].y - fitted[i];
    }

    constexpr double failed = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> estimates(n_resamples, failed);
    parallel_for(n_resamples, threads, [&](std::size_t b) {
        CounterStream rng(seed, b);
        std::vector<TimePoint> resampled(n);
        for (std::size_t i = 0; i < n; ++i) resampled[i] = {points[i].t, fitted[i] + residuals[rng.below(n)]};
        try {
            const auto refit = fit_logistic(resampled);
            if (refit.valid()) estimates[b] = refit.K;
        } catch (const Error&) {
        }
    });

    std::vector<double> ok;
    ok.reserve(n_resamples);
    for (double k : estimates)
        if (!std::isnan(k)) ok.push_back(k);
    const std::size_t failures = n_resamples - ok.size();
    if (static_cast<double>(failures) > kMaxBootstrapFailureRate * static_cast<double>(n_resamples))
        throw ConfidenceError("bootstrap: " + std::to_string(failures) + " of " + std::to_string(n_resamples) +
                                  " refits failed",
                              failures, n_resamples);
    std::sort(ok.begin(), ok.end());
    return ok;
}

/// One-sided upper confidence value of K at `level`, linear-interpolation quantile of the
/// residual-bootstrap distribution.
inline double k_upper_confidence(std::span<const TimePoint> points, const LogisticParams& fit, double level,
                                 std::size_t n_resamples, std::uint64_t seed, std::size_t threads = 1) {
    if (!(level > 0.0 && level < 1.0)) throw ArgumentError("k_upper_confidence: level must be in (0, 1)");
    const auto ks = bootstrap_carrying_capacity(points, fit, n_resamples, seed, threads);
    return stats::quantile_sorted(ks, level);
}

} // namespace dauval
