#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace riukf {

enum class ErrorKind {
    ContractViolation,
    Domain,
    CutLocus,
    Convergence,
    NotPsd,
    Factorization,
    SigmaOutOfBall,
    SingularInnovation,
    PositivenessLoss,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ContractViolation: return "contract-violation";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::CutLocus: return "cut-locus";
        case ErrorKind::Convergence: return "convergence";
        case ErrorKind::NotPsd: return "not-psd";
        case ErrorKind::Factorization: return "factorization";
        case ErrorKind::SigmaOutOfBall: return "sigma-out-of-ball";
        case ErrorKind::SingularInnovation: return "singular-innovation";
        case ErrorKind::PositivenessLoss: return "positiveness-loss";
    }
    return "unknown";
}

/// Single exception type for the library. The kind identifies the failure class;
/// stage and step are filled in as the error travels up through the UT and filter
/// layers so a caller can tell which sub-computation broke.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, std::string detail)
        : std::runtime_error(compose(kind, {}, std::nullopt, detail)), kind_(kind),
          detail_(std::move(detail)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& stage() const noexcept { return stage_; }
    std::optional<int> step() const noexcept { return step_; }
    const std::string& detail() const noexcept { return detail_; }

    /// Value stored alongside convergence errors (last gradient norm) and
    /// out-of-ball errors (offending norm).
    std::optional<double> value() const noexcept { return value_; }

    Error& with_value(double v) {
        value_ = v;
        return *this;
    }

    Error with_stage(std::string_view stage) const {
        Error e = *this;
        e.stage_ = e.stage_.empty() ? std::string(stage) : std::string(stage) + "/" + e.stage_;
        e.refresh();
        return e;
    }

    Error with_step(int k) const {
        Error e = *this;
        if (!e.step_) e.step_ = k;
        e.refresh();
        return e;
    }

    Error as(ErrorKind kind) const {
        Error e = *this;
        e.kind_ = kind;
        e.refresh();
        return e;
    }

  private:
    static std::string compose(ErrorKind kind, const std::string& stage, std::optional<int> step,
                               const std::string& detail) {
        std::string msg(to_string(kind));
        if (step) msg += " at step " + std::to_string(*step);
        if (!stage.empty()) msg += " [" + stage + "]";
        msg += ": " + detail;
        return msg;
    }

    void refresh() {
        static_cast<std::runtime_error&>(*this) =
            std::runtime_error(compose(kind_, stage_, step_, detail_));
    }

    ErrorKind kind_;
    std::string detail_;
    std::string stage_;
    std::optional<int> step_;
    std::optional<double> value_;
};

[[noreturn]] inline void fail(ErrorKind kind, std::string detail) {
    throw Error(kind, std::move(detail));
}

inline void require(bool condition, std::string_view what) {
    if (!condition) fail(ErrorKind::ContractViolation, std::string(what));
}

/// Runs fn and re-throws any library error tagged with the given stage.
template <class Fn>
decltype(auto) staged(std::string_view stage, Fn&& fn) {
    try {
        return std::forward<Fn>(fn)();
    } catch (const Error& e) {
        throw e.with_stage(stage);
    }
}

}  // namespace riukf
