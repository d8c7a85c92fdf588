#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace navsfm::optim {

// Parameter layout of a least-squares problem. Blocks flagged as eliminated
// must have size 3 (landmarks); they are removed by the Schur complement
// before the sparse solve.
class BlockLayout {
 public:
  int AddBlock(int size, bool eliminated = false);

  int NumBlocks() const { return static_cast<int>(sizes_.size()); }
  int Size(int block) const { return sizes_[block]; }
  bool Eliminated(int block) const { return eliminated_[block]; }
  // Offset into the full increment vector.
  int Offset(int block) const { return offsets_[block]; }
  // Index among reduced (non-eliminated) blocks, or among eliminated ones.
  int LocalIndex(int block) const { return local_index_[block]; }
  int TotalSize() const { return total_size_; }
  int ReducedSize() const { return reduced_size_; }
  int ReducedOffset(int block) const { return reduced_offset_[block]; }
  int NumReducedBlocks() const { return num_reduced_; }
  int NumEliminatedBlocks() const { return num_eliminated_; }

 private:
  std::vector<int> sizes_;
  std::vector<bool> eliminated_;
  std::vector<int> offsets_;
  std::vector<int> local_index_;
  std::vector<int> reduced_offset_;
  int total_size_ = 0;
  int reduced_size_ = 0;
  int num_reduced_ = 0;
  int num_eliminated_ = 0;
};

struct JacobianBlock {
  int block = -1;
  Eigen::MatrixXd jacobian;  // residual_dim x block size
};

// Gauss-Newton normal equations J^T J, J^T r, stored block-sparse.
class NormalEquations {
 public:
  explicit NormalEquations(const BlockLayout& layout);

  void Clear();
  void AddResidual(const Eigen::VectorXd& residual,
                   const std::vector<JacobianBlock>& jacobians);

  const Eigen::VectorXd& Gradient() const { return gradient_; }
  const BlockLayout& Layout() const { return layout_; }

  // Solves (H + lambda * D) delta = -g with D = clamp(diag(H)). Returns false
  // if the factorization fails. predicted_decrease receives the model
  // reduction of 0.5 * |r|^2.
  bool Solve(double lambda, Eigen::VectorXd* delta,
             double* predicted_decrease) const;

 private:
  struct PointCoupling {
    int reduced_block;
    Eigen::MatrixXd h;  // reduced block size x 3
  };

  static uint64_t Key(int a, int b) {
    return (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
  }

  const BlockLayout& layout_;
  Eigen::VectorXd gradient_;
  std::unordered_map<uint64_t, Eigen::MatrixXd> reduced_;  // keyed a <= b
  std::vector<Eigen::Matrix3d> point_diagonal_;
  std::vector<std::vector<PointCoupling>> point_coupling_;
};

// A problem exposes its current state through Evaluate (cost = 0.5 * sum of
// squared, possibly robustified, residuals) and is moved by Step.
class NonlinearProblem {
 public:
  virtual ~NonlinearProblem() = default;
  virtual const BlockLayout& Layout() const = 0;
  // Returns the cost at the current state. When normal_equations is not
  // null, also accumulates the linearization into it.
  virtual double Evaluate(NormalEquations* normal_equations) = 0;
  virtual void Step(const Eigen::VectorXd& delta) = 0;
  virtual void SaveState() = 0;
  virtual void RestoreState() = 0;
};

struct SolverOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-10;
  double function_tolerance = 1e-12;
  double step_tolerance = 1e-12;
  double initial_lambda = 1e-4;
  double max_lambda = 1e16;
};

enum class TerminationReason {
  kGradientTolerance,
  kFunctionTolerance,
  kStepTolerance,
  kMaxIterations,
  kNoProgress,  // damping exhausted without an accepted step
  kLinearSolverFailure,
};

std::string ToString(TerminationReason reason);

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;
  double candidate_cost = 0.0;
  double lambda = 0.0;
  bool accepted = false;
};

struct SolverSummary {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;  // linearizations performed
  int accepted_steps = 0;
  TerminationReason reason = TerminationReason::kMaxIterations;
  std::vector<IterationRecord> trace;

  bool Converged() const {
    return reason == TerminationReason::kGradientTolerance ||
           reason == TerminationReason::kFunctionTolerance ||
           reason == TerminationReason::kStepTolerance;
  }
  // True when the solver could make no progress at all from a non-optimal
  // state (reported, state untouched).
  bool Diverged() const {
    return reason == TerminationReason::kNoProgress ||
           reason == TerminationReason::kLinearSolverFailure;
  }
};

// Levenberg-Marquardt with Nielsen damping updates. Only cost-decreasing
// steps are accepted, so the final state is never worse than the initial one.
SolverSummary SolveLevenbergMarquardt(NonlinearProblem& problem,
                                      const SolverOptions& options = {});

}  // namespace navsfm::optim
