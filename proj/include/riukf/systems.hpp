#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "riukf/error.hpp"
#include "riukf/linalg.hpp"
#include "riukf/manifold.hpp"
#include "riukf/stats.hpp"

namespace riukf {

/// x_k = f(k, x_{k-1}) or y_k = h(k, x_k).
using StateFn = std::function<Point(int, const Point&)>;
/// x_k = f(k, x_{k-1}, w_k) or y_k = h(k, x_k, v_k) with a manifold-valued noise.
using NoisyStateFn = std::function<Point(int, const Point&, const Point&)>;

/// Tangent-space noise: mean and covariance in the deterministic basis at the
/// point where the noise enters.
struct NoiseSpec {
    Vector mean;
    Matrix cov;

    static NoiseSpec zero(int n) { return {Vector::Zero(n), Matrix::Zero(n, n)}; }
    static NoiseSpec centered(Matrix cov) {
        const auto n = cov.rows();
        return {Vector::Zero(n), std::move(cov)};
    }

    int dim() const { return static_cast<int>(mean.size()); }
    bool is_zero_mean() const { return mean.size() == 0 || mean.cwiseAbs().maxCoeff() == 0.0; }

    void validate(int n, std::string_view what) const {
        if (mean.size() != n) {
            fail(ErrorKind::ContractViolation, std::string(what) + ": noise mean has dimension " +
                                                   std::to_string(mean.size()) + ", expected " + std::to_string(n));
        }
        require_square(cov, n, what);
        if (!is_psd(cov)) fail(ErrorKind::NotPsd, std::string(what) + ": noise covariance is not PSD");
    }
};

struct AdditiveProcess {
    StateFn f;
    NoiseSpec noise;
    bool identity = false;

    static AdditiveProcess identity_map(NoiseSpec noise) {
        return {[](int, const Point& x) { return x; }, std::move(noise), true};
    }
};

struct GeneralProcess {
    NoisyStateFn f;
    RandomPointEstimate noise;
};

struct AdditiveMeasurement {
    StateFn h;
    NoiseSpec noise;
    bool identity = false;

    static AdditiveMeasurement identity_map(NoiseSpec noise) {
        return {[](int, const Point& x) { return x; }, std::move(noise), true};
    }
};

struct GeneralMeasurement {
    NoisyStateFn h;
    RandomPointEstimate noise;
};

/// Riemannian state-space system assembled from a process and a measurement model.
/// The noises are assumed uncorrelated.
template <class Process, class Measurement>
struct System {
    Manifold state_manifold;
    Manifold meas_manifold;
    Process process;
    Measurement measurement;
};

using AdditiveSystem = System<AdditiveProcess, AdditiveMeasurement>;
using GeneralSystem = System<GeneralProcess, GeneralMeasurement>;
/// General process, additive measurement.
using AdditiveMeasurementSystem = System<GeneralProcess, AdditiveMeasurement>;
/// Additive process, general measurement.
using AdditiveProcessSystem = System<AdditiveProcess, GeneralMeasurement>;
using PartiallyAdditiveSystem = std::variant<AdditiveMeasurementSystem, AdditiveProcessSystem>;

/// Adds a tangent-space random vector to a random point:
/// mean' = exp_mean(noise.mean), cov' = PT(cov + noise.cov, mean, mean').
inline RandomPointEstimate add_tangent_noise(const RandomPointEstimate& est, const NoiseSpec& noise) {
    est.validate();
    const Manifold& m = est.mean.manifold();
    noise.validate(m.dim(), "add_tangent_noise");
    const double norm = noise.mean.norm();
    if (!(norm < m.sigma_ball_radius())) {
        fail(ErrorKind::Domain, "add_tangent_noise: noise mean norm " + std::to_string(norm) +
                                    " is outside the admissible ball of radius " +
                                    std::to_string(m.sigma_ball_radius()));
    }
    const Matrix summed = symmetrize(est.cov + noise.cov);
    if (noise.is_zero_mean()) return {est.mean, summed};
    const TangentBasis basis = tangent_basis(est.mean);
    Point moved = exp_map(est.mean, from_coords(noise.mean, basis));
    Matrix cov = parallel_transport_cov(summed, est.mean, moved, basis, tangent_basis(moved));
    return {std::move(moved), std::move(cov)};
}

namespace detail {

inline Vector gaussian_coords(std::mt19937_64& rng, const Vector& mean, const Matrix& cov) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    return mean + psd_sqrt(cov) * z;
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

/// Gaussian in tangent coordinates at `at`, pushed forward by exp.
inline Point sample_tangent(std::mt19937_64& rng, const Point& at, const NoiseSpec& noise) {
    return exp_coords(at, gaussian_coords(rng, noise.mean, noise.cov));
}

inline Point sample_point(std::mt19937_64& rng, const RandomPointEstimate& noise) {
    return exp_coords(noise.mean, gaussian_coords(rng, Vector::Zero(noise.cov.rows()), noise.cov));
}

inline Point propagate(const AdditiveProcess& p, std::mt19937_64& rng, int k, const Point& x) {
    return sample_tangent(rng, p.f(k, x), p.noise);
}

inline Point propagate(const GeneralProcess& p, std::mt19937_64& rng, int k, const Point& x) {
    return p.f(k, x, sample_point(rng, p.noise));
}

inline Point observe(const AdditiveMeasurement& m, std::mt19937_64& rng, int k, const Point& x) {
    return sample_tangent(rng, m.h(k, x), m.noise);
}

inline Point observe(const GeneralMeasurement& m, std::mt19937_64& rng, int k, const Point& x) {
    return m.h(k, x, sample_point(rng, m.noise));
}

}  // namespace detail

/// states[0] = x0 and states[k] = x_k for k = 1..k_f; measurements[k-1] = y_k.
struct Trajectory {
    std::vector<Point> states;
    std::vector<Point> measurements;
};

/// Samples a trajectory. Process and measurement noise draw from independent
/// streams derived from `seed`, so a fixed seed reproduces the run bit for bit.
template <class Process, class Measurement>
Trajectory simulate(const System<Process, Measurement>& sys, const Point& x0, int k_f, std::uint64_t seed) {
    require(k_f >= 1, "simulate: k_f must be at least 1");
    require(x0.manifold() == sys.state_manifold, "simulate: x0 is not on the state manifold");
    auto process_rng = detail::make_stream(seed, 1);
    auto meas_rng = detail::make_stream(seed, 2);
    Trajectory out;
    out.states.reserve(static_cast<std::size_t>(k_f) + 1);
    out.measurements.reserve(static_cast<std::size_t>(k_f));
    out.states.push_back(x0);
    for (int k = 1; k <= k_f; ++k) {
        try {
            out.states.push_back(detail::propagate(sys.process, process_rng, k, out.states.back()));
            out.measurements.push_back(detail::observe(sys.measurement, meas_rng, k, out.states.back()));
        } catch (const Error& e) {
            throw e.with_stage("simulate").with_step(k);
        }
    }
    return out;
}

template <class... Systems>
Trajectory simulate(const std::variant<Systems...>& sys, const Point& x0, int k_f, std::uint64_t seed) {
    return std::visit([&](const auto& s) { return simulate(s, x0, k_f, seed); }, sys);
}

}  // namespace riukf
