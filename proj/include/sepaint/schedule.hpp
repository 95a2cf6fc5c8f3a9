#ifndef SEPAINT_SCHEDULE_HPP
#define SEPAINT_SCHEDULE_HPP

#include <string>
#include <vector>

namespace sepaint {

enum class ScheduleKind { cosine, linear };

/// Diffusion timetable beta_t, alpha_t = 1 - beta_t, alpha_bar_t = prod alpha_i.
/// Accessors are 1-based in t (t in {1..T}); t = 0 denotes clean data and
/// alpha_bar(0) == 1 by convention. Immutable after construction.
class NoiseSchedule {
public:
    NoiseSchedule(ScheduleKind kind, std::vector<double> beta, double param_a, double param_b);

    int steps() const { return static_cast<int>(beta_.size()); }

    double beta(int t) const { return beta_[check(t) - 1]; }
    double alpha(int t) const { return alpha_[check(t) - 1]; }
    double alpha_bar(int t) const { return t == 0 ? 1.0 : alpha_bar_[check(t) - 1]; }

    ScheduleKind kind() const { return kind_; }
    // cosine: param_a = s offset; linear: param_a = beta_start, param_b = beta_end.
    double param_a() const { return param_a_; }
    double param_b() const { return param_b_; }

private:
    int check(int t) const;

    ScheduleKind kind_;
    std::vector<double> beta_, alpha_, alpha_bar_;
    double param_a_, param_b_;
};

/// Cosine alpha-bar schedule: f(t) = cos^2(((t/T + s)/(1 + s)) * pi/2),
/// alpha_bar_t = f(t)/f(0), beta_t = 1 - alpha_bar_t/alpha_bar_{t-1} clipped
/// to 0.999. alpha_bar is recomputed as the cumulative product of the clipped
/// betas so the telescoping invariant holds exactly.
NoiseSchedule cosine_schedule(int steps, double s = 0.008);

NoiseSchedule linear_schedule(int steps, double beta_start, double beta_end);

const char* schedule_kind_name(ScheduleKind kind);
ScheduleKind schedule_kind_from_name(const std::string& name);

}  // namespace sepaint

#endif
