#include "navsfm/optim/levenberg_marquardt.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace navsfm::optim {
namespace {

constexpr double kMinDiagonal = 1e-6;
constexpr double kMaxDiagonal = 1e32;

double ClampDiagonal(double v) {
  return std::clamp(v, kMinDiagonal, kMaxDiagonal);
}

}  // namespace

int BlockLayout::AddBlock(int size, bool eliminated) {
  if (eliminated && size != 3) {
    throw std::invalid_argument("eliminated blocks must have size 3");
  }
  const int id = NumBlocks();
  sizes_.push_back(size);
  eliminated_.push_back(eliminated);
  offsets_.push_back(total_size_);
  total_size_ += size;
  if (eliminated) {
    local_index_.push_back(num_eliminated_++);
    reduced_offset_.push_back(-1);
  } else {
    local_index_.push_back(num_reduced_++);
    reduced_offset_.push_back(reduced_size_);
    reduced_size_ += size;
  }
  return id;
}

NormalEquations::NormalEquations(const BlockLayout& layout) : layout_(layout) {
  Clear();
}

void NormalEquations::Clear() {
  gradient_ = Eigen::VectorXd::Zero(layout_.TotalSize());
  reduced_.clear();
  point_diagonal_.assign(layout_.NumEliminatedBlocks(), Eigen::Matrix3d::Zero());
  point_coupling_.assign(layout_.NumEliminatedBlocks(), {});
}

void NormalEquations::AddResidual(const Eigen::VectorXd& residual,
                                  const std::vector<JacobianBlock>& jacobians) {
  for (size_t i = 0; i < jacobians.size(); ++i) {
    const JacobianBlock& a = jacobians[i];
    gradient_.segment(layout_.Offset(a.block), layout_.Size(a.block)) +=
        a.jacobian.transpose() * residual;
    for (size_t j = i; j < jacobians.size(); ++j) {
      const JacobianBlock& b = jacobians[j];
      const bool a_elim = layout_.Eliminated(a.block);
      const bool b_elim = layout_.Eliminated(b.block);
      if (a_elim && b_elim) {
        if (a.block != b.block) {
          throw std::invalid_argument("residual couples two eliminated blocks");
        }
        point_diagonal_[layout_.LocalIndex(a.block)] +=
            a.jacobian.transpose() * a.jacobian;
        continue;
      }
      if (a_elim || b_elim) {
        const JacobianBlock& cam = a_elim ? b : a;
        const JacobianBlock& pt = a_elim ? a : b;
        auto& couplings = point_coupling_[layout_.LocalIndex(pt.block)];
        const int rb = layout_.LocalIndex(cam.block);
        auto it = std::find_if(couplings.begin(), couplings.end(),
                               [rb](const PointCoupling& c) {
                                 return c.reduced_block == rb;
                               });
        if (it == couplings.end()) {
          couplings.push_back(
              {rb, Eigen::MatrixXd::Zero(cam.jacobian.cols(), 3)});
          it = std::prev(couplings.end());
        }
        it->h += cam.jacobian.transpose() * pt.jacobian;
        continue;
      }
      const int ra = layout_.LocalIndex(a.block);
      const int rb = layout_.LocalIndex(b.block);
      const JacobianBlock& lo = ra <= rb ? a : b;
      const JacobianBlock& hi = ra <= rb ? b : a;
      const uint64_t key = Key(std::min(ra, rb), std::max(ra, rb));
      auto [it, inserted] = reduced_.try_emplace(key);
      if (inserted) {
        it->second = lo.jacobian.transpose() * hi.jacobian;
      } else {
        it->second.noalias() += lo.jacobian.transpose() * hi.jacobian;
      }
      if (ra == rb && &a != &b) {
        // The same block appeared twice in one residual: add the mirrored
        // cross term as well.
        it->second.noalias() += hi.jacobian.transpose() * lo.jacobian;
      }
    }
  }
}

bool NormalEquations::Solve(double lambda, Eigen::VectorXd* delta,
                            double* predicted_decrease) const {
  const int num_reduced = layout_.NumReducedBlocks();
  std::vector<int> reduced_to_block(num_reduced);
  std::vector<int> eliminated_to_block(layout_.NumEliminatedBlocks());
  for (int b = 0; b < layout_.NumBlocks(); ++b) {
    (layout_.Eliminated(b) ? eliminated_to_block : reduced_to_block)
        [layout_.LocalIndex(b)] = b;
  }

  Eigen::VectorXd damping = Eigen::VectorXd::Zero(layout_.TotalSize());
  auto schur = reduced_;
  for (int r = 0; r < num_reduced; ++r) {
    const int block = reduced_to_block[r];
    const int size = layout_.Size(block);
    auto [it, inserted] = schur.try_emplace(Key(r, r));
    if (inserted) it->second = Eigen::MatrixXd::Zero(size, size);
    for (int i = 0; i < size; ++i) {
      const double d = lambda * ClampDiagonal(it->second(i, i));
      damping[layout_.Offset(block) + i] = d;
      it->second(i, i) += d;
    }
  }

  Eigen::VectorXd rhs(layout_.ReducedSize());
  for (int r = 0; r < num_reduced; ++r) {
    const int block = reduced_to_block[r];
    rhs.segment(layout_.ReducedOffset(block), layout_.Size(block)) =
        -gradient_.segment(layout_.Offset(block), layout_.Size(block));
  }

  std::vector<Eigen::Matrix3d> point_inverse(point_diagonal_.size());
  for (size_t p = 0; p < point_diagonal_.size(); ++p) {
    const int block = eliminated_to_block[p];
    Eigen::Matrix3d h = point_diagonal_[p];
    for (int i = 0; i < 3; ++i) {
      const double d = lambda * ClampDiagonal(h(i, i));
      damping[layout_.Offset(block) + i] = d;
      h(i, i) += d;
    }
    bool invertible = false;
    h.computeInverseWithCheck(point_inverse[p], invertible);
    if (!invertible || !point_inverse[p].allFinite()) return false;

    const Eigen::Vector3d gp = gradient_.segment<3>(layout_.Offset(block));
    const auto& couplings = point_coupling_[p];
    for (size_t i = 0; i < couplings.size(); ++i) {
      const Eigen::MatrixXd w_inv = couplings[i].h * point_inverse[p];
      const int bi = reduced_to_block[couplings[i].reduced_block];
      rhs.segment(layout_.ReducedOffset(bi), layout_.Size(bi)) += w_inv * gp;
      for (size_t j = 0; j < couplings.size(); ++j) {
        const int ri = couplings[i].reduced_block;
        const int rj = couplings[j].reduced_block;
        if (ri > rj) continue;
        auto [it, inserted] = schur.try_emplace(Key(ri, rj));
        if (inserted) {
          it->second = -w_inv * couplings[j].h.transpose();
        } else {
          it->second.noalias() -= w_inv * couplings[j].h.transpose();
        }
      }
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(schur.size() * 36);
  for (const auto& [key, m] : schur) {
    const int ra = static_cast<int>(key >> 32);
    const int rb = static_cast<int>(key & 0xffffffffu);
    const int oa = layout_.ReducedOffset(reduced_to_block[ra]);
    const int ob = layout_.ReducedOffset(reduced_to_block[rb]);
    for (int i = 0; i < m.rows(); ++i) {
      for (int j = 0; j < m.cols(); ++j) {
        // Upper triangle only; SimplicialLDLT reads the upper part.
        if (ra == rb && j < i) continue;
        triplets.emplace_back(oa + i, ob + j, m(i, j));
      }
    }
  }

  Eigen::VectorXd reduced_delta;
  if (layout_.ReducedSize() > 0) {
    Eigen::SparseMatrix<double> s(layout_.ReducedSize(), layout_.ReducedSize());
    s.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Upper> solver;
    solver.compute(s);
    if (solver.info() != Eigen::Success) return false;
    reduced_delta = solver.solve(rhs);
    if (solver.info() != Eigen::Success || !reduced_delta.allFinite()) {
      return false;
    }
  }

  delta->setZero(layout_.TotalSize());
  for (int r = 0; r < num_reduced; ++r) {
    const int block = reduced_to_block[r];
    delta->segment(layout_.Offset(block), layout_.Size(block)) =
        reduced_delta.segment(layout_.ReducedOffset(block), layout_.Size(block));
  }
  for (size_t p = 0; p < point_diagonal_.size(); ++p) {
    const int block = eliminated_to_block[p];
    Eigen::Vector3d rhs_p = -gradient_.segment<3>(layout_.Offset(block));
    for (const auto& c : point_coupling_[p]) {
      const int cb = reduced_to_block[c.reduced_block];
      rhs_p -= c.h.transpose() *
               reduced_delta.segment(layout_.ReducedOffset(cb), layout_.Size(cb));
    }
    delta->segment<3>(layout_.Offset(block)) = point_inverse[p] * rhs_p;
  }

  *predicted_decrease =
      0.5 * (delta->dot(damping.cwiseProduct(*delta)) - gradient_.dot(*delta));
  return delta->allFinite();
}

std::string ToString(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::kGradientTolerance:
      return "gradient_tolerance";
    case TerminationReason::kFunctionTolerance:
      return "function_tolerance";
    case TerminationReason::kStepTolerance:
      return "step_tolerance";
    case TerminationReason::kMaxIterations:
      return "max_iterations";
    case TerminationReason::kNoProgress:
      return "no_progress";
    case TerminationReason::kLinearSolverFailure:
      return "linear_solver_failure";
  }
  return "unknown";
}

SolverSummary SolveLevenbergMarquardt(NonlinearProblem& problem,
                                      const SolverOptions& options) {
  SolverSummary summary;
  NormalEquations normal(problem.Layout());
  double cost = problem.Evaluate(&normal);
  summary.initial_cost = cost;
  summary.final_cost = cost;

  double lambda = options.initial_lambda;
  double nu = 2.0;
  Eigen::VectorXd delta;
  int linear_failures = 0;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    summary.iterations = iter + 1;
    if (normal.Gradient().size() == 0 ||
        normal.Gradient().cwiseAbs().maxCoeff() <= options.gradient_tolerance) {
      summary.reason = TerminationReason::kGradientTolerance;
      return summary;
    }

    bool accepted = false;
    while (!accepted) {
      double predicted = 0.0;
      if (!normal.Solve(lambda, &delta, &predicted)) {
        if (++linear_failures > 20) {
          summary.reason = TerminationReason::kLinearSolverFailure;
          return summary;
        }
        lambda *= 10.0;
        continue;
      }
      if (delta.norm() <= options.step_tolerance) {
        summary.reason = TerminationReason::kStepTolerance;
        return summary;
      }
      problem.SaveState();
      problem.Step(delta);
      const double new_cost = problem.Evaluate(nullptr);
      IterationRecord record{iter, cost, new_cost, lambda, false};

      if (std::isfinite(new_cost) && new_cost <= cost) {
        record.accepted = true;
        summary.trace.push_back(record);
        ++summary.accepted_steps;
        const double gain = predicted > 0.0 ? (cost - new_cost) / predicted : 0.0;
        lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * gain - 1.0, 3));
        lambda = std::max(lambda, 1e-16);
        nu = 2.0;
        const double decrease = cost - new_cost;
        cost = new_cost;
        summary.final_cost = cost;
        accepted = true;
        if (decrease <= options.function_tolerance * std::max(cost, 1e-300) ||
            cost == 0.0) {
          summary.reason = TerminationReason::kFunctionTolerance;
          return summary;
        }
        normal.Clear();
        cost = problem.Evaluate(&normal);
        summary.final_cost = cost;
      } else {
        summary.trace.push_back(record);
        problem.RestoreState();
        lambda *= nu;
        nu *= 2.0;
        if (lambda > options.max_lambda) {
          summary.reason = TerminationReason::kNoProgress;
          return summary;
        }
      }
    }
  }
  summary.reason = TerminationReason::kMaxIterations;
  return summary;
}

}  // namespace navsfm::optim
