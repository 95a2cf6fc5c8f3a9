#include "sepaint/schedule.hpp"

#include <cmath>
#include <numbers>

#include "sepaint/errors.hpp"

namespace sepaint {

namespace {
constexpr double kBetaMax = 0.999;
}

NoiseSchedule::NoiseSchedule(ScheduleKind kind, std::vector<double> beta, double param_a,
                             double param_b)
    : kind_(kind), beta_(std::move(beta)), param_a_(param_a), param_b_(param_b) {
    if (beta_.empty()) throw ConfigError("schedule: T must be >= 1");
    alpha_.resize(beta_.size());
    alpha_bar_.resize(beta_.size());
    double bar = 1.0;
    for (std::size_t i = 0; i < beta_.size(); ++i) {
        const double b = beta_[i];
        if (!(b > 0.0) || b > kBetaMax)
            throw ConfigError("schedule: beta out of (0, 0.999] at t=" + std::to_string(i + 1));
        alpha_[i] = 1.0 - b;
        bar *= alpha_[i];
        alpha_bar_[i] = bar;
    }
}

int NoiseSchedule::check(int t) const {
    if (t < 1 || t > steps())
        throw DomainError("schedule: step " + std::to_string(t) + " outside [1, " +
                          std::to_string(steps()) + "]");
    return t;
}

NoiseSchedule cosine_schedule(int steps, double s) {
    if (steps < 1) throw ConfigError("cosine_schedule: T must be >= 1");
    if (!(s > 0.0) || s >= 0.1) throw ConfigError("cosine_schedule: s must be in (0, 0.1)");

    auto f = [&](double t) {
        const double x = ((t / steps + s) / (1.0 + s)) * std::numbers::pi / 2.0;
        const double c = std::cos(x);
        return c * c;
    };
    const double f0 = f(0.0);
    std::vector<double> beta(steps);
    double bar_prev = 1.0;
    for (int t = 1; t <= steps; ++t) {
        const double bar = f(static_cast<double>(t)) / f0;
        double b = 1.0 - bar / bar_prev;
        if (b > kBetaMax) b = kBetaMax;
        beta[t - 1] = b;
        bar_prev = bar;
    }
    return NoiseSchedule(ScheduleKind::cosine, std::move(beta), s, 0.0);
}

NoiseSchedule linear_schedule(int steps, double beta_start, double beta_end) {
    if (steps < 1) throw ConfigError("linear_schedule: T must be >= 1");
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || beta_end > kBetaMax)
        throw ConfigError("linear_schedule: need 0 < beta_start <= beta_end <= 0.999");

    std::vector<double> beta(steps);
    for (int t = 1; t <= steps; ++t) {
        const double u = steps == 1 ? 0.0 : static_cast<double>(t - 1) / (steps - 1);
        beta[t - 1] = beta_start + u * (beta_end - beta_start);
    }
    return NoiseSchedule(ScheduleKind::linear, std::move(beta), beta_start, beta_end);
}

const char* schedule_kind_name(ScheduleKind kind) {
    return kind == ScheduleKind::cosine ? "cosine" : "linear";
}

ScheduleKind schedule_kind_from_name(const std::string& name) {
    if (name == "cosine") return ScheduleKind::cosine;
    if (name == "linear") return ScheduleKind::linear;
    throw ConfigError("unknown schedule kind: " + name);
}

}  // namespace sepaint
