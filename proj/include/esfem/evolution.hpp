#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "esfem/assembly.hpp"
#include "esfem/fe.hpp"

namespace esfem {

namespace bdf {
// Backward differentiation coefficients {delta_0, ..., delta_order} for the
// approximation sum_j delta_j y^{n-j} ~ tau dy/dt; they sum to zero and
// delta_0 > 0. Orders 1 to 4.
const std::vector<double>& coefficients(int order);
}  // namespace bdf

// How steps 1 .. order-1 are produced. Bootstrap raises the scheme order one
// step at a time (preserves constants and mass integrals exactly).
// ExactField interpolates a known solution (manufactured runs). Precomputed
// takes caller-supplied coefficient blocks.
enum class StartupMode { Bootstrap, ExactField, Precomputed };

struct BdfOptions {
  int order = 4;
  double tau = 1e-3;
  double t0 = 0.0;
  double tEnd = 1.0;
  StartupMode startup = StartupMode::Bootstrap;
  const SpaceTimeField* exact = nullptr;   // ExactField startup
  std::vector<MatrixX> startupValues;      // Precomputed startup, order-1 blocks
  int loadDegree = 4;
  int threads = 1;
};

// Right side of the evolution (ambient formula near Gamma(t)); empty means 0.
using RhsFunction = std::function<double(const Vector3&, double)>;
// Called after every accepted state (including step 0).
using BdfObserver =
    std::function<void(int step, double time, const SurfaceMesh&, const MatrixX&)>;

// Integrates d/dt (M alpha) + A alpha = F with the BDF scheme applied to the
// conserved variable y = M alpha; the mesh rides the exact flow. `initial`
// may hold several columns (simultaneous trajectories sharing matrices).
// Returns the final coefficients. Step count: floor((tEnd - t0)/tau).
MatrixX bdfEvolve(const SurfaceMesh& mesh0, const MatrixX& initial, const RhsFunction& rhs,
                  const BdfOptions& options, const BdfObserver& observe = {});

// Stored trajectory of a single-column run.
struct Trajectory {
  std::shared_ptr<const SurfaceMesh> initialMesh;
  double tau = 0.0;
  int order = 0;
  std::vector<double> times;
  std::vector<VectorX> coefficients;

  SurfaceMesh meshAt(int step) const;
};

Trajectory bdfSolve(std::shared_ptr<const SurfaceMesh> mesh0, const VectorX& initial,
                    const RhsFunction& rhs, const BdfOptions& options);

// Adjoint evolution: integrates M(s) dbeta/ds = A(s) beta backward from
// beta(t) = w down to s = sEnd (bootstrap startup, BDF in reversed time).
// The returned trajectory's times decrease from t to sEnd.
Trajectory adjointSolve(std::shared_ptr<const SurfaceMesh> meshAtT, const VectorX& w,
                        double sEnd, const BdfOptions& options);

// Probe data for the maximum-norm stability study at one level:
//   supRatio  max over probes (20 random +-1 vectors and a nodal delta) of
//             |U(t)|_inf / |U(0)|_inf under the homogeneous forward evolution
//   greenL1   L1 norm on Gamma_h(0) of the adjoint evolution of the discrete
//             delta anchored at vertex 0 of Gamma_h(t)
struct WeakMaxData {
  int level = 0;
  double h = 0.0;
  double supRatio = 0.0;
  double greenL1 = 0.0;
};

WeakMaxData weakMaxData(const std::shared_ptr<const EvolvingSurface>& surface, int level,
                        double t, double tau, int order, std::uint64_t seed,
                        int threads = 1);

}  // namespace esfem
