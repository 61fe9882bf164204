#include "dawnik/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "dawnik/errors.hpp"

namespace dawnik {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged:
      return "converged";
    case SolveStatus::MaxIterations:
      return "max_iterations";
    case SolveStatus::InfeasibleStart:
      return "infeasible_start";
  }
  return "unknown";
}

void SolverOptions::validate() const {
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(initial_lambda > 0.0) || !(min_lambda > 0.0) || !(max_lambda >= min_lambda))
    throw ConfigError("damping bounds must be positive and ordered");
  if (!(lambda_decrease > 1.0) || !(lambda_increase > 1.0)) throw ConfigError("damping factors must exceed 1");
  if (!(radius_cap > 0.0)) throw ConfigError("radius cap must be > 0");
  if (!(step_tolerance >= 0.0) || !(cost_change_tolerance >= 0.0) || !(gradient_tolerance >= 0.0))
    throw ConfigError("tolerances must be >= 0");
  proximity.validate();
}

Eigen::VectorXd initialize_variables(const Eigen::VectorXd& q_curr, double noise_magnitude,
                                     const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                     std::mt19937_64& rng) {
  if (!(noise_magnitude >= 0.0)) throw std::invalid_argument("noise magnitude must be >= 0");
  if (lower.size() != q_curr.size() || upper.size() != q_curr.size())
    throw DimensionError("bounds and joint vector differ in length");
  Eigen::VectorXd q = q_curr;
  if (noise_magnitude > 0.0) {
    std::uniform_real_distribution<double> u(-noise_magnitude, noise_magnitude);
    for (Eigen::Index i = 0; i < q.size(); ++i) q[i] += u(rng);
  }
  return q.cwiseMax(lower).cwiseMin(upper);
}

Eigen::VectorXd initialize_variables(const Eigen::VectorXd& q_curr, double noise_magnitude,
                                     const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return initialize_variables(q_curr, noise_magnitude, lower, upper, rng);
}

Eigen::VectorXd max_step_from_jerk(const ArmState& state, double dt, double j_max) {
  if (!(dt > 0.0)) throw std::invalid_argument("max_step_from_jerk needs dt > 0");
  if (!(j_max > 0.0)) throw std::invalid_argument("max_step_from_jerk needs j_max > 0");
  return state.qdot().cwiseAbs() * dt + state.qddot().cwiseAbs() * (dt * dt / 2.0) +
         Eigen::VectorXd::Constant(state.size(), j_max * dt * dt * dt / 6.0);
}

Eigen::VectorXd trust_region_radius(const Eigen::VectorXd& dq_max, const SolverOptions& options) {
  Eigen::VectorXd r = dq_max.cwiseMin(options.radius_cap);
  if (options.step_limit == StepLimit::Uniform && r.size() > 0) r.setConstant(r.minCoeff());
  return r;
}

CommandBounds command_bounds(const RobotModel& model, const Eigen::VectorXd& q, double dt) {
  check_dimension(model, q.size());
  if (!(dt > 0.0)) throw std::invalid_argument("command_bounds needs dt > 0");
  CommandBounds b{model.lower_limits(), model.upper_limits()};
  for (int i = 0; i < model.dof(); ++i) {
    const double v = model.actuated_joint(i).limits.velocity;
    if (!(v > 0.0)) continue;
    // Clamped first so a start outside the limits still gives lower <= upper.
    b.lower[i] = std::max(b.lower[i], std::min(q[i] - v * dt, b.upper[i]));
    b.upper[i] = std::min(b.upper[i], std::max(q[i] + v * dt, b.lower[i]));
  }
  return b;
}

NormalEquations build_normal_equations(std::span<const ResidualBlock> blocks, int dof) {
  NormalEquations eq{Eigen::MatrixXd::Zero(dof, dof), Eigen::VectorXd::Zero(dof)};
  for (const auto& b : blocks) {
    if (b.residuals.size() == 0) continue;
    if (b.jacobian.rows() != b.residuals.size() || b.jacobian.cols() != dof)
      throw DimensionError("residual block without a matching Jacobian");
    const double w = b.weight * apply_robust_loss(b).drho;
    if (w == 0.0) continue;
    eq.hessian.noalias() += w * b.jacobian.transpose() * b.jacobian;
    eq.gradient.noalias() += w * b.jacobian.transpose() * b.residuals;
  }
  return eq;
}

bool solve_damped(const NormalEquations& eq, double lambda, Eigen::VectorXd& delta) {
  const Eigen::Index n = eq.gradient.size();
  Eigen::MatrixXd a = eq.hessian;
  for (Eigen::Index i = 0; i < n; ++i) a(i, i) += lambda * std::max(eq.hessian(i, i), 1e-12);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
  delta = ldlt.solve(-eq.gradient);
  return delta.allFinite();
}

Eigen::VectorXd clip_step(const Eigen::VectorXd& delta, const Eigen::VectorXd& radius) {
  return delta.cwiseMax(-radius).cwiseMin(radius);
}

Convergence convergence_check(double step_inf_norm, double cost_before, double cost_after, double gradient_inf_norm,
                              const SolverOptions& options) {
  if (gradient_inf_norm < options.gradient_tolerance) return Convergence::Converged;
  if (step_inf_norm < options.step_tolerance) return Convergence::Converged;
  const double scale = std::max(std::abs(cost_before), std::numeric_limits<double>::min());
  if (std::abs(cost_before - cost_after) / scale < options.cost_change_tolerance) return Convergence::Converged;
  return Convergence::Continue;
}

Solver::Solver(SolverOptions options, std::uint64_t seed) : options_(options), rng_(seed) { options_.validate(); }

SolveResult Solver::solve(const SolveRequest& request) {
  const auto t0 = std::chrono::steady_clock::now();
  if (request.model == nullptr || request.state == nullptr || request.acm == nullptr)
    throw std::invalid_argument("solve request is missing the model, state or ACM");
  const RobotModel& model = *request.model;
  const ArmState& state = *request.state;
  check_dimension(model, state.size());
  const int n = model.dof();
  const Eigen::VectorXd lower = model.lower_limits();
  const Eigen::VectorXd upper = model.upper_limits();

  SolveResult result;

  // Pairs are chosen once at the current configuration and held fixed.
  const WorldSpheres own = sphere_world_positions(model, state.q(), request.base, request.arm);
  result.active_pairs = find_active_pairs(own, request.external_spheres, *request.acm, options_.proximity);
  result.min_active_gap = std::numeric_limits<double>::infinity();
  for (const auto& p : result.active_pairs) result.min_active_gap = std::min(result.min_active_gap, p.gap);

  const CostProblem problem(model, request.base, state, result.active_pairs, request.goal, request.weights,
                            request.dt);

  TrustRegionState tr;
  tr.lambda = options_.initial_lambda;
  tr.radius = trust_region_radius(max_step_from_jerk(state, request.dt, request.weights.j_max), options_);
  result.step_bounds = tr.radius;
  // Steps are clipped to the radius; the command as a whole stays within
  // what the joints can travel in one tick.
  const CommandBounds box = command_bounds(model, state.q(), request.dt);
  const Eigen::VectorXd& box_lo = box.lower;
  const Eigen::VectorXd& box_hi = box.upper;

  Eigen::VectorXd x = initialize_variables(state.q(), request.weights.noise_magnitude, lower, upper, rng_)
                          .cwiseMax(box_lo)
                          .cwiseMin(box_hi);
  double cost = problem.cost(x);
  result.initial_cost = cost;
  const bool infeasible = !std::isfinite(cost) || result.min_active_gap < 0.0;
  if (!std::isfinite(cost)) {
    x = state.q().cwiseMax(box_lo).cwiseMin(box_hi);
    cost = problem.cost(x);
  }
  result.accepted_costs.push_back(cost);

  bool converged = false;
  int iterations = 0;
  while (iterations < options_.max_iterations && !converged && std::isfinite(cost)) {
    const auto blocks = problem.evaluate(x, true);
    const NormalEquations eq = build_normal_equations(blocks, n);
    const double grad_norm = n > 0 ? eq.gradient.cwiseAbs().maxCoeff() : 0.0;
    if (grad_norm < options_.gradient_tolerance) {
      converged = true;
      break;
    }
    // Retry with growing damping until a step lowers the cost.
    while (iterations < options_.max_iterations) {
      ++iterations;
      Eigen::VectorXd delta;
      if (!solve_damped(eq, tr.lambda, delta)) {
        ++tr.rejected;
        tr.lambda = std::min(tr.lambda * options_.lambda_increase, options_.max_lambda);
        continue;
      }
      const Eigen::VectorXd candidate = (x + clip_step(delta, tr.radius)).cwiseMax(box_lo).cwiseMin(box_hi);
      const double step_norm = (candidate - x).cwiseAbs().maxCoeff();
      if (step_norm < options_.step_tolerance) {
        converged = true;
        break;
      }
      const double new_cost = problem.cost(candidate);
      if (std::isfinite(new_cost) && new_cost < cost) {
        ++tr.accepted;
        tr.lambda = std::max(tr.lambda / options_.lambda_decrease, options_.min_lambda);
        const Convergence c = convergence_check(step_norm, cost, new_cost, grad_norm, options_);
        x = candidate;
        cost = new_cost;
        result.accepted_costs.push_back(cost);
        converged = c == Convergence::Converged;
        break;
      }
      ++tr.rejected;
      tr.lambda = std::min(tr.lambda * options_.lambda_increase, options_.max_lambda);
    }
  }

  result.q_cmd = x;
  result.iterations = iterations;
  result.accepted = tr.accepted;
  result.rejected = tr.rejected;
  result.final_cost = cost;
  result.cost_breakdown = breakdown(problem.evaluate(x, false));
  if (infeasible) {
    result.status = SolveStatus::InfeasibleStart;
  } else {
    result.status = converged ? SolveStatus::Converged : SolveStatus::MaxIterations;
  }
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace dawnik
