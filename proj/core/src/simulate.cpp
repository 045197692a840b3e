#include "dadp/simulate.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "dadp/errors.hpp"

namespace dadp {

Vector ExplorationPolicy::probe_at(double t) const {
  Vector u = Vector::Zero(input_dim());
  for (std::size_t ch = 0; ch < probe.size(); ++ch) {
    double acc = 0.0;
    for (const Sinusoid& s : probe[ch]) acc += s.amplitude * std::sin(s.frequency * t + s.phase);
    u(static_cast<Eigen::Index>(ch)) = acc;
  }
  return u;
}

Vector ExplorationPolicy::input(double t, const Eigen::Ref<const Vector>& x) const {
  return probe_at(t) - behavior_gain * x;
}

int default_frequency_count(Eigen::Index n, Eigen::Index m) {
  const Eigen::Index need = tri_size(n) + m * n;
  return static_cast<int>((need + m - 1) / m);
}

ExplorationPolicy make_sinusoid_exploration(Eigen::Index n, Eigen::Index m,
                                            std::uint64_t seed,
                                            const ExcitationOptions& options) {
  if (n < 1 || m < 1) throw DimensionMismatch("exploration: n and m must be positive");
  if (!(options.min_frequency > 0.0) || options.max_frequency < options.min_frequency) {
    throw ConfigError("exploration: need 0 < min_frequency <= max_frequency");
  }
  const int count = options.frequencies_per_channel > 0
                        ? options.frequencies_per_channel
                        : default_frequency_count(n, m);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(options.min_frequency, options.max_frequency);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  ExplorationPolicy policy;
  policy.behavior_gain = Matrix::Zero(m, n);
  policy.seed = seed;
  policy.probe.resize(static_cast<std::size_t>(m));
  for (auto& channel : policy.probe) {
    channel.reserve(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
      // Draw order is part of the reproducibility contract.
      const double w = freq(rng);
      const double p = phase(rng);
      channel.push_back({options.amplitude, w, p});
    }
  }
  return policy;
}

double Trajectory::duration() const {
  if (times.size() < 2) return 0.0;
  return fine_step * static_cast<double>(times.size() - 1);
}

Trajectory simulate(const LtiSystem& sys, const ExplorationPolicy& policy,
                    const Eigen::Ref<const Vector>& x0, double duration,
                    double fine_step, const SimulationOptions& options) {
  const Eigen::Index n = sys.state_dim();
  const Eigen::Index m = sys.input_dim();
  if (x0.size() != n) throw DimensionMismatch("simulate: x0 has the wrong length");
  if (policy.behavior_gain.rows() != m || policy.behavior_gain.cols() != n ||
      policy.probe.size() != static_cast<std::size_t>(m)) {
    throw DimensionMismatch("simulate: exploration policy does not match the plant");
  }
  if (!(fine_step > 0.0) || !(duration > 0.0)) {
    throw ConfigError("simulate: duration and fine step must be positive");
  }
  const double ratio = duration / fine_step;
  const auto steps = static_cast<Eigen::Index>(std::llround(ratio));
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("simulate: duration must be an integer multiple of the fine step");
  }

  const Matrix& A = sys.A();
  const Matrix& B = sys.B();
  auto rhs = [&](double t, const Vector& x) -> Vector {
    return A * x + B * policy.input(t, x);
  };

  Trajectory traj;
  traj.fine_step = fine_step;
  traj.times.resize(static_cast<std::size_t>(steps + 1));
  traj.states.resize(steps + 1, n);
  traj.inputs.resize(steps + 1, m);

  const double t0 = options.start_time;
  const double h = fine_step;
  Vector x = x0;
  for (Eigen::Index k = 0; k <= steps; ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    traj.times[static_cast<std::size_t>(k)] = t;
    traj.states.row(k) = x.transpose();
    traj.inputs.row(k) = policy.input(t, x).transpose();
    if (k == steps) break;
    const Vector k1 = rhs(t, x);
    const Vector k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1);
    const Vector k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2);
    const Vector k4 = rhs(t + h, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > options.divergence_bound) {
      const double t_bad = t + h;
      std::ostringstream msg;
      msg << "simulate: state diverged at t = " << t_bad;
      throw Divergence(msg.str(), t_bad);
    }
  }
  return traj;
}

namespace {

Eigen::Index steps_per_interval(double dt, double h) {
  const double ratio = dt / h;
  const auto per = static_cast<Eigen::Index>(std::llround(ratio));
  if (per < 1 || std::abs(ratio - static_cast<double>(per)) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("data matrices: dt must be an integer multiple of the fine step");
  }
  return per;
}

void fill_rows(const Trajectory& traj, Eigen::Index per, Eigen::Index count,
               Eigen::Index row0, DataMatrices& dm) {
  const Eigen::Index n = dm.n;
  const Eigen::Index m = dm.m;
  const double h = traj.fine_step;
  Vector xk(n);
  Vector uk(m);
  for (Eigen::Index k = 0; k < count; ++k) {
    const Eigen::Index a = k * per;
    const Eigen::Index b = a + per;
    const Eigen::Index row = row0 + k;
    dm.delta_xx.row(row) =
        (mu(traj.states.row(b).transpose()) - mu(traj.states.row(a).transpose())).transpose();
    Vector ix = Vector::Zero(tri_size(n));
    Vector ixx = Vector::Zero(n * n);
    Vector ixu = Vector::Zero(n * m);
    for (Eigen::Index j = a; j <= b; ++j) {
      const double w = (j == a || j == b) ? 0.5 * h : h;
      xk = traj.states.row(j).transpose();
      uk = traj.inputs.row(j).transpose();
      ix += w * mu(xk);
      for (Eigen::Index p = 0; p < n; ++p) {
        ixx.segment(p * n, n) += (w * xk(p)) * xk;
        ixu.segment(p * m, m) += (w * xk(p)) * uk;
      }
    }
    dm.i_x.row(row) = ix.transpose();
    dm.i_xx.row(row) = ixx.transpose();
    dm.i_xu.row(row) = ixu.transpose();
  }
}

DataMatrices empty_matrices(Eigen::Index rows, Eigen::Index n, Eigen::Index m, double dt) {
  DataMatrices dm;
  dm.n = n;
  dm.m = m;
  dm.dt = dt;
  dm.delta_xx.resize(rows, tri_size(n));
  dm.i_x.resize(rows, tri_size(n));
  dm.i_xx.resize(rows, n * n);
  dm.i_xu.resize(rows, n * m);
  return dm;
}

}  // namespace

DataMatrices build_data_matrices(const Trajectory& traj, double dt, Eigen::Index count) {
  if (traj.size() < 2) throw ConfigError("data matrices: trajectory is empty");
  if (count < 1) throw ConfigError("data matrices: interval count must be positive");
  const Eigen::Index per = steps_per_interval(dt, traj.fine_step);
  if (count * per > static_cast<Eigen::Index>(traj.size()) - 1) {
    throw ConfigError("data matrices: trajectory is shorter than count * dt");
  }
  DataMatrices dm = empty_matrices(count, traj.state_dim(), traj.input_dim(), dt);
  fill_rows(traj, per, count, 0, dm);
  return dm;
}

DataMatrices build_data_matrices(std::span<const Trajectory> experiments, double dt) {
  if (experiments.empty()) throw ConfigError("data matrices: no experiments");
  const Eigen::Index n = experiments.front().state_dim();
  const Eigen::Index m = experiments.front().input_dim();
  std::vector<Eigen::Index> counts;
  Eigen::Index total = 0;
  for (const Trajectory& traj : experiments) {
    if (traj.state_dim() != n || traj.input_dim() != m) {
      throw DimensionMismatch("data matrices: experiments disagree on dimensions");
    }
    const Eigen::Index per = steps_per_interval(dt, traj.fine_step);
    const Eigen::Index c = (static_cast<Eigen::Index>(traj.size()) - 1) / per;
    counts.push_back(c);
    total += c;
  }
  if (total < 1) throw ConfigError("data matrices: experiments shorter than one interval");
  DataMatrices dm = empty_matrices(total, n, m, dt);
  Eigen::Index row = 0;
  for (std::size_t e = 0; e < experiments.size(); ++e) {
    const Eigen::Index per = steps_per_interval(dt, experiments[e].fine_step);
    fill_rows(experiments[e], per, counts[e], row, dm);
    row += counts[e];
  }
  return dm;
}

Eigen::Index default_interval_count(Eigen::Index n, Eigen::Index m) {
  return 2 * (tri_size(n) + m * n);
}

std::vector<Trajectory> collect_trajectories(const LtiSystem& sys,
                                             const ExplorationPolicy& policy,
                                             const DataPlan& plan) {
  const Eigen::Index n = sys.state_dim();
  const Eigen::Index Z = plan.intervals > 0 ? plan.intervals
                                            : default_interval_count(n, sys.input_dim());
  if (!(plan.dt > 0.0)) throw ConfigError("data plan: dt must be positive");
  if (plan.x0 && plan.x0->size() != n) throw DimensionMismatch("data plan: x0 has the wrong length");

  // Separate stream from the excitation draws so changing Z does not move
  // the probe frequencies.
  std::mt19937_64 rng(plan.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw_state = [&]() {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = plan.x0_scale * normal(rng);
    return x;
  };

  std::vector<Trajectory> out;
  if (plan.restart_each_interval) {
    out.reserve(static_cast<std::size_t>(Z));
    for (Eigen::Index k = 0; k < Z; ++k) {
      Vector x0 = (k == 0 && plan.x0) ? *plan.x0 : draw_state();
      SimulationOptions opts;
      opts.start_time = static_cast<double>(k) * plan.dt;
      out.push_back(simulate(sys, policy, x0, plan.dt, plan.fine_step, opts));
    }
  } else {
    Vector x0 = plan.x0 ? *plan.x0 : draw_state();
    out.push_back(simulate(sys, policy, x0, static_cast<double>(Z) * plan.dt, plan.fine_step));
  }
  return out;
}

DataMatrices collect_data(const LtiSystem& sys, const ExplorationPolicy& policy,
                          const DataPlan& plan) {
  const auto trajectories = collect_trajectories(sys, policy, plan);
  return build_data_matrices(std::span<const Trajectory>(trajectories), plan.dt);
}

RankReport check_rank(const DataMatrices& dm, double rel_tol) {
  RankReport report;
  report.required = static_cast<int>(dm.unknown_count());
  const Eigen::Index Z = dm.interval_count();
  if (Z == 0) return report;
  Matrix stacked(Z, dm.i_x.cols() + dm.i_xu.cols());
  stacked << dm.i_x, dm.i_xu;
  Eigen::JacobiSVD<Matrix> svd(stacked);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || !(s(0) > 0.0)) return report;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++rank;
  }
  report.numerical_rank = rank;
  report.satisfied = rank == report.required;
  return report;
}

}  // namespace dadp
