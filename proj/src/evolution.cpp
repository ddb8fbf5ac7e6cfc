#include "esfem/evolution.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <deque>
#include <random>

#include "esfem/norms.hpp"
#include "esfem/projections.hpp"

namespace esfem {

namespace bdf {

const std::vector<double>& coefficients(int order) {
  static const std::vector<std::vector<double>> table = {
      {1.0, -1.0},
      {1.5, -2.0, 0.5},
      {11.0 / 6.0, -3.0, 1.5, -1.0 / 3.0},
      {25.0 / 12.0, -4.0, 3.0, -4.0 / 3.0, 0.25},
  };
  if (order < 1 || order > 4) {
    throw DomainError("bdf::coefficients: order must lie in [1, 4], got " +
                      std::to_string(order));
  }
  return table[static_cast<std::size_t>(order - 1)];
}

}  // namespace bdf

namespace {

void validateOptions(const SurfaceMesh& mesh0, const BdfOptions& o) {
  bdf::coefficients(o.order);
  if (!(o.tau > 0)) throw DomainError("bdfEvolve: tau must be positive");
  if (o.order == 4 && o.tau > 0.01 + 1e-15) {
    throw DomainError("bdfEvolve: tau must not exceed 0.01 at order 4");
  }
  mesh0.surface->requireTime(o.t0);
  mesh0.surface->requireTime(o.tEnd);
  if (!(o.tEnd > o.t0)) throw DomainError("bdfEvolve: tEnd must exceed t0");
  if (o.startup == StartupMode::ExactField && o.exact == nullptr) {
    throw DomainError("bdfEvolve: ExactField startup requires an exact field");
  }
}

int stepCount(double t0, double tEnd, double tau) {
  return static_cast<int>(std::floor((tEnd - t0) / tau + 1e-9));
}

// One CG solve per column, warm-started from the previous state.
MatrixX solveColumns(const SparseMatrix& system, const MatrixX& rhs, const MatrixX& guess) {
  MatrixX solution(rhs.rows(), rhs.cols());
  for (Eigen::Index c = 0; c < rhs.cols(); ++c) {
    const VectorX g = guess.col(c);
    solution.col(c) = cgSolve(system, rhs.col(c), 1e-12, &g);
  }
  return solution;
}

}  // namespace

MatrixX bdfEvolve(const SurfaceMesh& mesh0, const MatrixX& initial, const RhsFunction& rhs,
                  const BdfOptions& options, const BdfObserver& observe) {
  validateOptions(mesh0, options);
  if (initial.rows() != mesh0.vertexCount()) {
    throw DomainError("bdfEvolve: initial coefficient rows must match vertex count");
  }
  const int k = options.order;
  const int steps = stepCount(options.t0, options.tEnd, options.tau);
  const double tau = options.tau;

  SurfaceMesh mesh = mesh0.time == options.t0 ? mesh0 : advectMesh(mesh0, options.t0);
  MatrixX state = initial;
  // History of the conserved variable y^m = M(t_m) alpha^m, newest first.
  std::deque<MatrixX> history;
  history.push_front(assembleMass(mesh).matrix * state);
  if (observe) observe(0, options.t0, mesh, state);

  int firstDynamicStep = 1;
  if (options.startup == StartupMode::ExactField && k > 1) {
    if (initial.cols() != 1) {
      throw DomainError("bdfEvolve: ExactField startup supports single trajectories");
    }
    for (int m = 1; m < k && m <= steps; ++m) {
      const double tm = options.t0 + m * tau;
      mesh = advectMesh(mesh0, tm);
      for (int j = 0; j < mesh.vertexCount(); ++j) {
        state(j, 0) = options.exact->value(mesh.vertex(j), tm);
      }
      history.push_front(assembleMass(mesh).matrix * state);
      if (observe) observe(m, tm, mesh, state);
      firstDynamicStep = m + 1;
    }
  } else if (options.startup == StartupMode::Precomputed && k > 1) {
    if (static_cast<int>(options.startupValues.size()) != k - 1) {
      throw DomainError("bdfEvolve: Precomputed startup needs order-1 blocks");
    }
    for (int m = 1; m < k && m <= steps; ++m) {
      const double tm = options.t0 + m * tau;
      mesh = advectMesh(mesh0, tm);
      state = options.startupValues[static_cast<std::size_t>(m - 1)];
      history.push_front(assembleMass(mesh).matrix * state);
      if (observe) observe(m, tm, mesh, state);
      firstDynamicStep = m + 1;
    }
  }

  for (int n = firstDynamicStep; n <= steps; ++n) {
    const double tn = options.t0 + n * tau;
    mesh = advectMesh(mesh0, tn);
    // Bootstrap: raise the order with the available history.
    const int effectiveOrder =
        options.startup == StartupMode::Bootstrap ? std::min(k, n) : k;
    const std::vector<double>& delta = bdf::coefficients(effectiveOrder);

    const SparseMatrix M = assembleMass(mesh).matrix;
    const SparseMatrix A = assembleStiffness(mesh).matrix;
    MatrixX rhsBlock = MatrixX::Zero(state.rows(), state.cols());
    for (int j = 1; j <= effectiveOrder; ++j) {
      rhsBlock -= delta[static_cast<std::size_t>(j)] *
                  history[static_cast<std::size_t>(j - 1)];
    }
    if (rhs) {
      const VectorX load = assembleLoad(mesh, rhs, options.loadDegree, options.threads);
      rhsBlock.colwise() += tau * load;
    }
    const SparseMatrix system = delta[0] * M + tau * A;
    state = solveColumns(system, rhsBlock, state);
    // Carry y through the recurrence so telescoping identities hold exactly.
    history.push_front((rhsBlock - tau * (A * state)) / delta[0]);
    while (static_cast<int>(history.size()) > k) history.pop_back();
    if (observe) observe(n, tn, mesh, state);
  }
  return state;
}

SurfaceMesh Trajectory::meshAt(int step) const {
  if (step < 0 || step >= static_cast<int>(times.size())) {
    throw DomainError("Trajectory::meshAt: step out of range");
  }
  return advectMesh(*initialMesh, times[static_cast<std::size_t>(step)]);
}

Trajectory bdfSolve(std::shared_ptr<const SurfaceMesh> mesh0, const VectorX& initial,
                    const RhsFunction& rhs, const BdfOptions& options) {
  Trajectory traj;
  traj.initialMesh = mesh0;
  traj.tau = options.tau;
  traj.order = options.order;
  bdfEvolve(*mesh0, initial, rhs, options,
            [&](int, double time, const SurfaceMesh&, const MatrixX& state) {
              traj.times.push_back(time);
              traj.coefficients.push_back(state.col(0));
            });
  return traj;
}

Trajectory adjointSolve(std::shared_ptr<const SurfaceMesh> meshAtT, const VectorX& w,
                        double sEnd, const BdfOptions& options) {
  BdfOptions o = options;
  const double t = meshAtT->time;
  if (!(sEnd < t)) throw DomainError("adjointSolve: sEnd must precede the mesh time");
  meshAtT->surface->requireTime(sEnd);
  bdf::coefficients(o.order);
  if (!(o.tau > 0)) throw DomainError("adjointSolve: tau must be positive");
  if (o.order == 4 && o.tau > 0.01 + 1e-15) {
    throw DomainError("adjointSolve: tau must not exceed 0.01 at order 4");
  }
  if (w.size() != meshAtT->vertexCount()) {
    throw DomainError("adjointSolve: coefficient length must match vertex count");
  }

  const int steps = stepCount(sEnd, t, o.tau);
  Trajectory traj;
  traj.initialMesh = meshAtT;
  traj.tau = o.tau;
  traj.order = o.order;

  SurfaceMesh mesh = *meshAtT;
  VectorX state = w;
  std::deque<VectorX> history;  // beta values, newest first
  history.push_front(state);
  traj.times.push_back(t);
  traj.coefficients.push_back(state);

  for (int n = 1; n <= steps; ++n) {
    const double sn = t - n * o.tau;
    mesh = advectMesh(*meshAtT, sn);
    const int effectiveOrder = std::min(o.order, n);
    const std::vector<double>& delta = bdf::coefficients(effectiveOrder);
    const SparseMatrix M = assembleMass(mesh).matrix;
    const SparseMatrix A = assembleStiffness(mesh).matrix;
    VectorX combo = VectorX::Zero(state.size());
    for (int j = 1; j <= effectiveOrder; ++j) {
      combo -= delta[static_cast<std::size_t>(j)] * history[static_cast<std::size_t>(j - 1)];
    }
    const SparseMatrix system = delta[0] * M + o.tau * A;
    const VectorX rhs = M * combo;
    state = cgSolve(system, rhs, 1e-12, &state);
    history.push_front(state);
    while (static_cast<int>(history.size()) > o.order) history.pop_back();
    traj.times.push_back(sn);
    traj.coefficients.push_back(state);
  }
  return traj;
}

WeakMaxData weakMaxData(const std::shared_ptr<const EvolvingSurface>& surface, int level,
                        double t, double tau, int order, std::uint64_t seed, int threads) {
  const SurfaceMesh mesh0 = buildIcosphere(surface, level);
  WeakMaxData data;
  data.level = level;
  data.h = mesh0.h;

  const int n = mesh0.vertexCount();
  std::mt19937_64 engine(seed + 977 * static_cast<std::uint64_t>(level));
  std::uniform_int_distribution<int> coin(0, 1);
  const int randomProbes = 20;
  MatrixX probes = MatrixX::Zero(n, randomProbes + 1);
  for (int c = 0; c < randomProbes; ++c) {
    for (int j = 0; j < n; ++j) probes(j, c) = coin(engine) == 0 ? -1.0 : 1.0;
  }
  probes(0, randomProbes) = 1.0;  // nodal delta probe

  BdfOptions options;
  options.order = order;
  options.tau = tau;
  options.t0 = surface->timeBegin;
  options.tEnd = t;
  options.startup = StartupMode::Bootstrap;
  options.threads = threads;
  const MatrixX finalState = bdfEvolve(mesh0, probes, {}, options);
  double ratio = 0.0;
  for (Eigen::Index c = 0; c < finalState.cols(); ++c) {
    ratio = std::max(ratio, feLinfNorm(finalState.col(c)) / feLinfNorm(probes.col(c)));
  }
  data.supRatio = ratio;

  const auto meshT = std::make_shared<const SurfaceMesh>(advectMesh(mesh0, t));
  const VectorX delta = discreteDelta(*meshT, meshT->vertex(0));
  const Trajectory adjoint = adjointSolve(meshT, delta, surface->timeBegin, options);
  const SurfaceMesh meshStart = adjoint.meshAt(static_cast<int>(adjoint.times.size()) - 1);
  data.greenL1 = feL1Norm(meshStart, adjoint.coefficients.back());
  return data;
}

}  // namespace esfem
