#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "riukf/manifold.hpp"
#include "riukf/sigma.hpp"
#include "riukf/stats.hpp"

namespace riukf {

using PointMap = std::function<Point(const Point&)>;

/// Output of a Riemannian unscented transformation. The sigma sets are kept so
/// filters can reuse the dependent set without regenerating it.
struct UTResult {
    Point mean_out;
    Matrix cov_out;
    std::optional<Matrix> cross_cov;
    WeightedSet independent;
    WeightedSet dependent;
};

struct UTOptions {
    KarcherOptions karcher;
};

/// Maps an already generated independent set through f and reads off the dependent
/// statistics. `independent_mean` is the sample mean of the independent set.
inline UTResult transform_set(const PointMap& f, const WeightedSet& independent, const Point& independent_mean,
                              bool with_cross, const UTOptions& opts = {}) {
    WeightedSet dependent{{}, independent.w_m, independent.w_c, independent.w_cc};
    dependent.points.reserve(independent.size());
    staged("map", [&] {
        for (const auto& p : independent.points) dependent.points.push_back(f(p));
    });
    const Point init = staged("map", [&] { return f(independent_mean); });
    Point mean_out = staged("karcher", [&] { return karcher_mean(dependent, init, opts.karcher); });
    Matrix cov = staged("covariance", [&] { return sample_covariance(dependent, mean_out); });
    std::optional<Matrix> cross;
    if (with_cross) {
        cross = staged("cross-covariance", [&] {
            return sample_cross_covariance(independent, independent_mean, dependent, mean_out);
        });
    }
    return UTResult{std::move(mean_out), std::move(cov), std::move(cross), independent, std::move(dependent)};
}

/// Mean and covariance of f(X) for X ~ est, through a freshly generated sigma set.
inline UTResult riut1(const PointMap& f, const RandomPointEstimate& est, const SigmaKind& kind,
                      const UTOptions& opts = {}) {
    return staged("riut1", [&] {
        WeightedSet chi = staged("sigma", [&] { return riemannian_sigma(kind, est); });
        return transform_set(f, chi, est.mean, false, opts);
    });
}

/// As riut1, plus the cross-covariance between X (logs at est.mean) and f(X).
inline UTResult riut2(const PointMap& f, const RandomPointEstimate& est, const SigmaKind& kind,
                      const UTOptions& opts = {}) {
    return staged("riut2", [&] {
        WeightedSet chi = staged("sigma", [&] { return riemannian_sigma(kind, est); });
        return transform_set(f, chi, est.mean, true, opts);
    });
}

}  // namespace riukf
