#include "jsde/integrator.hpp"

#include <cmath>
#include <ostream>

#include "jsde/error.hpp"
#include "jsde/format.hpp"

namespace jsde {
namespace {

double checked(double value, const char* what, double state) {
  if (!std::isfinite(value))
    throw NumericalDomainError(std::string(what) + " is not finite at state " +
                                   format_real(state),
                               state);
  return value;
}

double compensation_drift(const CoefficientSet& model, double x) {
  if (model.nu1.is_zero()) return 0.0;
  return model.nu1.integrate([&](double u) { return model.c1(x, u); });
}

double drift_increment(double bx, double dt, Taming taming) {
  const double raw = bx * dt;
  return taming == Taming::drift_tamed ? raw / (1.0 + std::abs(bx) * dt) : raw;
}

}  // namespace

SchemeConfig default_scheme(const CoefficientSet& model, double base_step,
                            double explosion_radius) {
  SchemeConfig s;
  s.base_step = base_step;
  s.explosion_radius = explosion_radius;
  s.taming = model.superlinear_drift ? Taming::drift_tamed : Taming::off;
  return s;
}

PathResult simulate(const CoefficientSet& model, const NoiseRealization& noise,
                    const SchemeConfig& scheme, double x0) {
  if (!(scheme.base_step > 0.0)) throw DomainError("scheme base step must be positive");
  if (!(scheme.explosion_radius > 0.0)) throw DomainError("explosion radius must be positive");
  if (noise.base_grid.size() < 2) throw DomainError("noise realization has an empty grid");
  if (std::abs(noise.base_step() - scheme.base_step) > 1e-12 * scheme.base_step)
    throw DomainError("scheme base step " + format_real(scheme.base_step) +
                      " does not match the noise grid step " + format_real(noise.base_step()));
  if (!std::isfinite(x0)) throw DomainError("initial state must be finite");
  if (noise.event_brownian.size() != noise.jump_events.size() ||
      noise.brownian_increments.size() + 1 != noise.base_grid.size())
    throw DomainError("noise realization is inconsistent (grid, increments and event values differ in size)");

  const double radius = scheme.explosion_radius;
  const std::vector<double> w_nodes = noise.brownian_path();

  PathResult path;
  path.realization_seed = noise.seed;
  path.taming = scheme.taming;
  const std::size_t capacity = noise.base_grid.size() + noise.jump_events.size();
  path.times.reserve(capacity);
  path.states.reserve(capacity);
  path.left_limits.reserve(capacity);
  path.kinds.reserve(capacity);
  path.marks.reserve(capacity);
  path.brownian.reserve(capacity);

  auto push = [&](double t, double state, double left, PointKind kind, double mark, double w) {
    path.times.push_back(t);
    path.states.push_back(state);
    path.left_limits.push_back(left);
    path.kinds.push_back(kind);
    path.marks.push_back(mark);
    path.brownian.push_back(w);
  };
  auto exited = [&](double t, double state) {
    if (std::abs(state) >= radius) {
      path.exploded = true;
      path.exit_time = t;
      return true;
    }
    return false;
  };

  double x = x0;
  push(0.0, x, x, PointKind::grid, NAN, 0.0);
  if (exited(0.0, x)) return path;

  auto advance = [&](double dt, double dw) {
    if (dt <= 0.0 && dw == 0.0) return;
    const double bx = checked(model.b(x), "drift", x);
    const double sx = checked(model.sigma(x), "diffusion", x);
    const double comp = checked(compensation_drift(model, x), "compensation drift", x);
    const double next = x + drift_increment(bx, dt, scheme.taming) + sx * dw - comp * dt;
    x = checked(next, "state update", x);
  };

  const auto& events = noise.jump_events;
  std::size_t k = 0;
  for (std::size_t i = 0; i < noise.steps(); ++i) {
    double s = noise.base_grid[i];
    double ws = w_nodes[i];
    const double right = noise.base_grid[i + 1];
    ++path.noise_reads;
    while (k < events.size() && events[k].time < right) {
      const JumpEvent& ev = events[k];
      const double wk = noise.event_brownian[k];
      ++k;
      ++path.noise_reads;
      if (ev.source == JumpSource::large && scheme.restrict_to_u3 && !model.u3.contains(ev.mark))
        continue;
      advance(ev.time - s, wk - ws);
      const double left = x;
      const double jump = ev.source == JumpSource::small ? model.c1(left, ev.mark)
                                                         : model.c2(left, ev.mark);
      x = checked(left + checked(jump, "jump coefficient", left), "jump update", left);
      const PointKind kind =
          ev.source == JumpSource::small ? PointKind::small_jump : PointKind::large_jump;
      if (ev.time <= path.times.back()) {
        // Event on an existing node: the node becomes the jump point.
        path.states.back() = x;
        path.kinds.back() = kind;
        path.marks.back() = ev.mark;
      } else {
        push(ev.time, x, left, kind, ev.mark, wk);
      }
      s = ev.time;
      ws = wk;
      if (exited(ev.time, x)) return path;
    }
    advance(right - s, w_nodes[i + 1] - ws);
    push(right, x, x, PointKind::grid, NAN, w_nodes[i + 1]);
    if (exited(right, x)) return path;
  }
  return path;
}

std::optional<double> first_exit_time(const PathResult& path, double radius) {
  if (!(radius > 0.0)) throw DomainError("exit radius must be positive");
  for (std::size_t i = 0; i < path.states.size(); ++i)
    if (std::abs(path.states[i]) >= radius) return path.times[i];
  return std::nullopt;
}

PathResult ito_levy_apply(const ItoFunction& f, const PathResult& path,
                          const CoefficientSet& model, const NoiseRealization& noise) {
  if (!f.f || !f.df || !f.d2f) throw DomainError("Ito functional needs f, f' and f''");
  if (path.realization_seed != noise.seed)
    throw DomainError("path and noise come from different realizations");
  if (path.times.empty()) return path;

  PathResult y = path;
  y.states.assign(path.states.size(), 0.0);
  y.left_limits.assign(path.states.size(), 0.0);
  double value = checked(f.f(path.states[0]), "f", path.states[0]);
  y.states[0] = y.left_limits[0] = value;

  for (std::size_t j = 1; j < path.times.size(); ++j) {
    const double x = path.states[j - 1];
    const double dt = path.times[j] - path.times[j - 1];
    const double dw = path.brownian[j] - path.brownian[j - 1];
    const double fx = f.f(x);
    const double fp = f.df(x);
    const double fpp = f.d2f(x);
    const double bx = model.b(x);
    const double sx = model.sigma(x);
    double correction = 0.0;
    double jump_compensator = 0.0;
    if (!model.nu1.is_zero()) {
      correction = model.nu1.integrate([&](double u) {
        const double c = model.c1(x, u);
        return f.f(x + c) - fx - fp * c;
      });
      jump_compensator = model.nu1.integrate([&](double u) { return f.f(x + model.c1(x, u)) - fx; });
    }
    value += fp * drift_increment(bx, dt, path.taming) + fp * sx * dw +
             (0.5 * sx * sx * fpp + correction - jump_compensator) * dt;
    checked(value, "Ito functional", x);
    y.left_limits[j] = value;
    if (path.kinds[j] != PointKind::grid) {
      const double left = path.left_limits[j];
      const double c = path.kinds[j] == PointKind::small_jump ? model.c1(left, path.marks[j])
                                                              : model.c2(left, path.marks[j]);
      value += f.f(left + c) - f.f(left);
      checked(value, "Ito functional jump", left);
    }
    y.states[j] = value;
  }
  return y;
}

void write_path_csv(std::ostream& out, const PathResult& path, std::string_view label,
                    double base_step, double radius) {
  out << "# label=" << label << " seed=" << path.realization_seed
      << " h=" << format_real(base_step) << " R=" << format_real(radius) << '\n';
  out << "time,state,event_kind\n";
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    const char* kind = "grid";
    if (path.kinds[i] == PointKind::small_jump) kind = "small_jump";
    if (path.kinds[i] == PointKind::large_jump) kind = "large_jump";
    if (path.exploded && i + 1 == path.times.size()) kind = "exit";
    out << format_real(path.times[i]) << ',' << format_real(path.states[i]) << ',' << kind
        << '\n';
  }
}

}  // namespace jsde
